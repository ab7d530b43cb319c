#include "slideagg/features.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "slideagg/csv.hpp"
#include "slideagg/errors.hpp"
#include "slideagg/parallel.hpp"

namespace slideagg {

namespace {

// Lower edge of bin k, (10 + k) / 20, is the double nearest the decimal edge,
// matching how a probability such as "0.55" parses from text.
double bin_edge(int k) { return (10.0 + k) / 20.0; }

class DisjointSets {
 public:
  explicit DisjointSets(Eigen::Index n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), Eigen::Index{0});
  }

  Eigen::Index find(Eigen::Index i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<Eigen::Index> parent_;
  std::vector<Eigen::Index> size_;
};

struct CellHash {
  std::size_t operator()(const std::pair<long long, long long>& c) const noexcept {
    return std::hash<long long>()(c.first * 0x9E3779B97F4A7C15LL ^ c.second);
  }
};

}  // namespace

FlatFeatures FeatureVector::flatten() const {
  FlatFeatures flat;
  flat << mtr, mph, lsrl.slope, lsrl.intercept, mcc;
  return flat;
}

FeatureVector FeatureVector::from_flat(const FlatFeatures& flat) {
  FeatureVector fv;
  fv.mtr = flat(0);
  fv.mph = flat.segment<kHistogramBins>(1);
  fv.lsrl = {flat(11), flat(12)};
  fv.mcc = flat.tail<kMccRadiusCount>();
  return fv;
}

double malignant_tissue_ratio(const SlideRecord& slide) {
  if (slide.patches.empty()) return 0.0;
  const auto n = std::count_if(slide.patches.begin(), slide.patches.end(),
                               [](const PatchPrediction& p) { return is_malignant(p.prob_malignant); });
  return static_cast<double>(n) / static_cast<double>(slide.patches.size());
}

int histogram_bin(double p) {
  if (!is_malignant(p)) return -1;
  int k = std::clamp(static_cast<int>(std::floor(p * 20.0)) - 10, 0, kHistogramBins - 1);
  while (k + 1 < kHistogramBins && p >= bin_edge(k + 1)) ++k;
  while (k > 0 && p < bin_edge(k)) --k;
  return k;
}

Histogram10 malignant_probability_histogram(const SlideRecord& slide) {
  Histogram10 bins = Histogram10::Zero();
  if (slide.patches.empty()) return bins;
  for (const auto& p : slide.patches)
    if (const int k = histogram_bin(p.prob_malignant); k >= 0) bins(k) += 1.0;
  return bins / static_cast<double>(slide.patches.size());
}

RegressionLine least_squares_regression_line(const Histogram10& bins) {
  Eigen::Matrix<double, kHistogramBins, 2> design;
  design.col(0) = Histogram10::LinSpaced(0.0, kHistogramBins - 1.0);
  design.col(1).setOnes();
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(bins);
  return {coef(0), coef(1)};
}

Eigen::VectorXi component_labels(const Eigen::Ref<const Eigen::Matrix2Xd>& centers, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("connected components radius must be positive and finite");
  const Eigen::Index n = centers.cols();
  if (!centers.allFinite()) throw std::invalid_argument("connected components need finite points");

  // Bucket points into radius-sized cells; any pair within `radius` lies in
  // the same or an adjacent cell.
  auto cell_of = [radius](double v) { return static_cast<long long>(std::floor(v / radius)); };
  std::unordered_map<std::pair<long long, long long>, std::vector<Eigen::Index>, CellHash> grid;
  grid.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) grid[{cell_of(centers(0, i)), cell_of(centers(1, i))}].push_back(i);

  const double r2 = radius * radius;
  DisjointSets sets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long long cx = cell_of(centers(0, i));
    const long long cy = cell_of(centers(1, i));
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find({cx + dx, cy + dy});
        if (it == grid.end()) continue;
        for (const Eigen::Index j : it->second)
          if (j > i && (centers.col(i) - centers.col(j)).squaredNorm() <= r2) sets.unite(i, j);
      }
    }
  }

  Eigen::VectorXi labels(n);
  std::unordered_map<Eigen::Index, int> root_label;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [it, inserted] = root_label.try_emplace(sets.find(i), static_cast<int>(root_label.size()));
    labels(i) = it->second;
  }
  return labels;
}

std::vector<Eigen::Matrix2Xd> connected_components(const Eigen::Ref<const Eigen::Matrix2Xd>& centers,
                                                   double radius) {
  const Eigen::VectorXi labels = component_labels(centers, radius);
  const int count = labels.size() == 0 ? 0 : labels.maxCoeff() + 1;
  std::vector<std::vector<Eigen::Index>> members(count);
  for (Eigen::Index i = 0; i < labels.size(); ++i) members[labels(i)].push_back(i);

  std::vector<Eigen::Matrix2Xd> components;
  components.reserve(count);
  for (const auto& idx : members) components.emplace_back(centers(Eigen::all, idx));
  return components;
}

Eigen::Matrix2Xd malignant_centers(const SlideRecord& slide) {
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < slide.patches.size(); ++i)
    if (is_malignant(slide.patches[i].prob_malignant)) keep.push_back(static_cast<Eigen::Index>(i));
  Eigen::Matrix2Xd centers(2, static_cast<Eigen::Index>(keep.size()));
  for (Eigen::Index c = 0; c < centers.cols(); ++c) {
    const auto& p = slide.patches[keep[c]];
    centers.col(c) << static_cast<double>(p.x), static_cast<double>(p.y);
  }
  return centers;
}

MccProfile mcc_profile(const SlideRecord& slide) {
  MccProfile profile = MccProfile::Zero();
  const Eigen::Matrix2Xd centers = malignant_centers(slide);
  if (centers.cols() == 0) return profile;
  for (int k = 0; k < kMccRadiusCount; ++k) {
    const Eigen::VectorXi labels = component_labels(centers, kMccRadii[k]);
    profile(k) = static_cast<double>(labels.maxCoeff() + 1) / static_cast<double>(centers.cols());
  }
  return profile;
}

FeatureVector extract_features(const SlideRecord& slide) {
  FeatureVector fv;
  fv.mtr = malignant_tissue_ratio(slide);
  fv.mph = malignant_probability_histogram(slide);
  fv.lsrl = least_squares_regression_line(fv.mph);
  fv.mcc = mcc_profile(slide);
  return fv;
}

Dataset extract_dataset(const std::vector<SlideRecord>& slides, int jobs) {
  Dataset data(slides.size());
  parallel_for(slides.size(), jobs, [&](std::size_t i) {
    data[i] = {slides[i].slide_id, slides[i].label, extract_features(slides[i])};
  });
  return data;
}

std::string feature_csv_header() {
  std::string h = "slide_id,label,mtr";
  for (int k = 0; k < kHistogramBins; ++k) h += ",mph_" + std::to_string(k);
  h += ",lsrl_m,lsrl_b";
  for (double r : kMccRadii) h += ",mcc_" + std::to_string(static_cast<int>(r));
  return h;
}

void write_feature_csv(const Dataset& data, const std::filesystem::path& path) {
  auto out = csv::open_for_write(path);
  out << feature_csv_header() << '\n';
  for (const auto& s : data) {
    out << s.slide_id << ',' << to_string(s.label);
    const FlatFeatures flat = s.features.flatten();
    for (Eigen::Index i = 0; i < flat.size(); ++i) out << ',' << csv::format_real(flat(i));
    out << '\n';
  }
  if (!out) throw Error(Errc::WriteFailed, path.string());
}

Dataset read_feature_csv(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(Errc::MissingFile, path.string());
  csv::LineReader reader(path);
  const auto header = reader.next();
  if (!header || *header != feature_csv_header())
    throw RowError(Errc::MalformedRow, path.string(), 1, "unexpected feature CSV header");

  Dataset data;
  while (auto line = reader.next()) {
    if (csv::trim(*line).empty()) continue;
    const auto cols = csv::split(*line);
    const auto row = reader.line_no();
    if (cols.size() != 2 + kFeatureCount)
      throw RowError(Errc::MalformedRow, path.string(), row, "wrong column count");
    const auto label = parse_label(csv::trim(cols[1]));
    if (!label) throw RowError(Errc::MalformedRow, path.string(), row, "unknown label");
    FlatFeatures flat;
    for (int i = 0; i < kFeatureCount; ++i) {
      const auto v = csv::parse_real(cols[2 + i]);
      if (!v) throw RowError(Errc::MalformedRow, path.string(), row, "bad number in column " + std::to_string(3 + i));
      flat(i) = *v;
    }
    data.push_back({std::string(csv::trim(cols[0])), *label, FeatureVector::from_flat(flat)});
  }
  return data;
}

}  // namespace slideagg
