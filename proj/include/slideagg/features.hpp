#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slideagg/types.hpp"

namespace slideagg {

inline constexpr int kHistogramBins = 10;
inline constexpr int kMccRadiusCount = 5;
inline constexpr int kFeatureCount = 1 + kHistogramBins + 2 + kMccRadiusCount;

// Euclidean radii (pixels) reaching 1..5 patch distances on a 100 px patch grid.
inline constexpr std::array<double, kMccRadiusCount> kMccRadii{142.0, 283.0, 425.0, 566.0, 708.0};

// Bin k covers prob_malignant in [0.50 + 0.05k, 0.55 + 0.05k); the last bin is
// closed at 1.0. Values are patch counts divided by the slide's total tissue
// patch count, so the bins sum to the malignant tissue ratio.
using Histogram10 = Eigen::Matrix<double, kHistogramBins, 1>;
using MccProfile = Eigen::Matrix<double, kMccRadiusCount, 1>;
using FlatFeatures = Eigen::Matrix<double, kFeatureCount, 1>;

// y = slope * x + intercept fitted over (bin index, bin value) pairs.
struct RegressionLine {
  double slope = 0.0;
  double intercept = 0.0;
};

struct FeatureVector {
  double mtr = 0.0;
  Histogram10 mph = Histogram10::Zero();
  RegressionLine lsrl;
  MccProfile mcc = MccProfile::Zero();

  // Order: mtr, mph[0..9], slope, intercept, mcc[0..4].
  FlatFeatures flatten() const;
  static FeatureVector from_flat(const FlatFeatures& flat);
};

double malignant_tissue_ratio(const SlideRecord& slide);

// Index of the histogram bin for a malignant-classified probability, or -1
// when prob < 0.5.
int histogram_bin(double prob_malignant);

Histogram10 malignant_probability_histogram(const SlideRecord& slide);

// Least-squares line through (i, bins[i]), i = 0..9.
RegressionLine least_squares_regression_line(const Histogram10& bins);

// Single-linkage clustering of points (columns of `centers`): two points share
// a component iff a chain of points joins them with every hop <= radius.
// Labels are 0-based and numbered in order of each component's first point.
Eigen::VectorXi component_labels(const Eigen::Ref<const Eigen::Matrix2Xd>& centers, double radius);

// Components as point sets; columns keep input order and components are
// ordered by their first point.
std::vector<Eigen::Matrix2Xd> connected_components(const Eigen::Ref<const Eigen::Matrix2Xd>& centers,
                                                   double radius);

// Centers of malignant-classified patches, one column each.
Eigen::Matrix2Xd malignant_centers(const SlideRecord& slide);

MccProfile mcc_profile(const SlideRecord& slide);

FeatureVector extract_features(const SlideRecord& slide);

struct Sample {
  std::string slide_id;
  Label label = Label::Normal;
  FeatureVector features;
};
using Dataset = std::vector<Sample>;

Dataset extract_dataset(const std::vector<SlideRecord>& slides, int jobs = 1);

std::string feature_csv_header();
void write_feature_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_feature_csv(const std::filesystem::path& path);

}  // namespace slideagg
