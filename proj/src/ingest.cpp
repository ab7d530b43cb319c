#include "slideagg/ingest.hpp"

#include <unordered_set>

#include "slideagg/csv.hpp"
#include "slideagg/errors.hpp"
#include "slideagg/parallel.hpp"

namespace slideagg {

namespace fs = std::filesystem;

namespace {

bool is_blank(std::string_view line) { return csv::trim(line).empty(); }

void expect_header(csv::LineReader& reader, const fs::path& path, std::string_view expected) {
  const auto header = reader.next();
  if (!header) throw RowError(Errc::MalformedRow, path.string(), 1, "missing header");
  const auto cols = csv::split(*header);
  const auto want = csv::split(expected);
  bool match = cols.size() == want.size();
  for (std::size_t i = 0; match && i < cols.size(); ++i) match = csv::trim(cols[i]) == want[i];
  if (!match)
    throw RowError(Errc::MalformedRow, path.string(), 1,
                   "expected header '" + std::string(expected) + "'");
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw Error(Errc::MissingFile, path.string());
  csv::LineReader reader(path);
  expect_header(reader, path, kManifestHeader);

  DatasetManifest manifest;
  std::unordered_set<std::string> seen;
  const fs::path base = path.parent_path();
  while (auto line = reader.next()) {
    if (is_blank(*line)) continue;
    const auto cols = csv::split(*line);
    const auto row = reader.line_no();
    if (cols.size() != 3)
      throw RowError(Errc::MalformedRow, path.string(), row,
                     "expected 3 columns, got " + std::to_string(cols.size()));
    ManifestEntry entry;
    entry.slide_id = std::string(csv::trim(cols[0]));
    if (entry.slide_id.empty())
      throw RowError(Errc::MalformedRow, path.string(), row, "empty slide_id");
    const auto label = parse_label(csv::trim(cols[1]));
    if (!label)
      throw RowError(Errc::MalformedRow, path.string(), row,
                     "unknown label '" + std::string(csv::trim(cols[1])) + "'");
    entry.label = *label;
    const fs::path pred(std::string(csv::trim(cols[2])));
    if (pred.empty()) throw RowError(Errc::MalformedRow, path.string(), row, "empty path");
    entry.predictions_path = pred.is_absolute() ? pred : base / pred;
    if (!seen.insert(entry.slide_id).second)
      throw Error(Errc::DuplicateSlideId, entry.slide_id);
    manifest.entries.push_back(std::move(entry));
  }
  for (const auto& e : manifest.entries)
    if (!fs::is_regular_file(e.predictions_path))
      throw Error(Errc::MissingFile,
                  e.predictions_path.string() + " (slide " + e.slide_id + ")");
  return manifest;
}

SlideRecord load_slide(const ManifestEntry& entry) {
  const auto& path = entry.predictions_path;
  csv::LineReader reader(path);
  expect_header(reader, path, kPatchHeader);

  SlideRecord slide{entry.slide_id, entry.label, {}};
  while (auto line = reader.next()) {
    if (is_blank(*line)) continue;
    const auto cols = csv::split(*line);
    const auto row = reader.line_no();
    if (cols.size() != 3)
      throw RowError(Errc::MalformedRow, path.string(), row,
                     "expected 3 columns, got " + std::to_string(cols.size()));
    const auto x = csv::parse_int(cols[0]);
    const auto y = csv::parse_int(cols[1]);
    const auto p = csv::parse_real(cols[2]);
    if (!x || !y || *x < 0 || *y < 0)
      throw RowError(Errc::MalformedRow, path.string(), row,
                     "coordinates must be non-negative integers");
    if (!p) throw RowError(Errc::MalformedRow, path.string(), row, "bad probability");
    if (*p < 0.0 || *p > 1.0)
      throw RowError(Errc::ProbabilityOutOfRange, path.string(), row,
                     "prob_malignant " + std::string(csv::trim(cols[2])) + " outside [0,1]");
    slide.patches.push_back({*x, *y, *p});
  }
  return slide;
}

std::vector<SlideRecord> load_slides(const DatasetManifest& manifest, int jobs) {
  std::vector<SlideRecord> slides(manifest.entries.size());
  parallel_for(slides.size(), jobs,
               [&](std::size_t i) { slides[i] = load_slide(manifest.entries[i]); });
  return slides;
}

void write_slide(const SlideRecord& slide, const fs::path& path) {
  auto out = csv::open_for_write(path);
  out << kPatchHeader << '\n';
  for (const auto& p : slide.patches)
    out << p.x << ',' << p.y << ',' << csv::format_real(p.prob_malignant) << '\n';
  if (!out) throw Error(Errc::WriteFailed, path.string());
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  auto out = csv::open_for_write(path);
  out << kManifestHeader << '\n';
  for (const auto& e : manifest.entries)
    out << e.slide_id << ',' << to_string(e.label) << ',' << e.predictions_path.generic_string()
        << '\n';
  if (!out) throw Error(Errc::WriteFailed, path.string());
}

ValidationSummary validate_dataset(const DatasetManifest& manifest) {
  ValidationSummary summary;
  for (const auto& e : manifest.entries) {
    (e.label == Label::Malignant ? summary.malignant : summary.normal) += 1;
    try {
      const auto slide = load_slide(e);
      summary.patch_counts.emplace_back(e.slide_id, slide.patches.size());
      if (slide.patches.empty()) summary.zero_patch_slides.push_back(e.slide_id);
    } catch (const std::exception& ex) {
      summary.problems.emplace_back(e.slide_id, ex.what());
    }
  }
  return summary;
}

}  // namespace slideagg
