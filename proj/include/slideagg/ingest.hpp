#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "slideagg/types.hpp"

namespace slideagg {

struct ManifestEntry {
  std::string slide_id;
  Label label = Label::Normal;
  // Resolved against the manifest's directory when the file holds a relative path.
  std::filesystem::path predictions_path;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

inline constexpr const char* kManifestHeader = "slide_id,label,predictions_path";
inline constexpr const char* kPatchHeader = "x,y,prob_malignant";

/// Parses a manifest CSV (`slide_id,label,predictions_path`).
/// Throws MissingFile if the manifest or any referenced prediction file is
/// absent, RowError(MalformedRow) on a bad header, column count or label token,
/// and DuplicateSlideId on a repeated id.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Parses one slide's patch CSV; row order is preserved.
/// Throws RowError(MalformedRow) or RowError(ProbabilityOutOfRange).
SlideRecord load_slide(const ManifestEntry& entry);

// Loads every entry, `jobs` slides at a time. Output order follows the manifest.
std::vector<SlideRecord> load_slides(const DatasetManifest& manifest, int jobs = 1);

void write_slide(const SlideRecord& slide, const std::filesystem::path& path);
// Paths are written exactly as stored in the entries.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct ValidationSummary {
  std::size_t malignant = 0;
  std::size_t normal = 0;
  std::vector<std::pair<std::string, std::size_t>> patch_counts;
  std::vector<std::string> zero_patch_slides;
  // Slides whose prediction file failed to parse, with the error text.
  std::vector<std::pair<std::string, std::string>> problems;

  bool ok() const noexcept { return problems.empty(); }
};

// Reports label counts and per-slide patch counts; never throws on bad slides.
ValidationSummary validate_dataset(const DatasetManifest& manifest);

}  // namespace slideagg
