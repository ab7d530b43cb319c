#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slideagg/classifier.hpp"

namespace slideagg {

// Malignant is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  void add(Label truth, Label predicted);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Percentages in [0, 100] except auc in [0, 1]. A metric whose denominator is
// zero is left empty and skipped when averaging.
struct MetricSet {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> precision;
  std::optional<double> f1;
  std::optional<double> auc;
};

// 2 * precision * sensitivity / (precision + sensitivity); empty when the sum is 0.
std::optional<double> f1_score(double precision, double sensitivity);

// Throws EmptyEvaluation on an all-zero matrix. auc is left empty.
MetricSet compute_metrics(const ConfusionMatrix& cm);

// Arithmetic mean of each metric over the sets where it is defined.
MetricSet average_metrics(std::span<const MetricSet> rows);

struct ScoredLabel {
  double p_malignant;
  Label truth;
};

// Mann-Whitney statistic: P(score_malignant > score_normal) + P(tie) / 2 over
// all malignant x normal pairs, via average ranks. Throws SingleClassScores.
double roc_auc(std::span<const ScoredLabel> scores);

// K lists of dataset indices, each sorted ascending.
using FoldAssignment = std::vector<std::vector<std::size_t>>;

/// Shuffles each class with a generator seeded by `seed`, then deals
/// malignant slides followed by normal slides round-robin into K folds,
/// continuing the deal position across classes so fold sizes differ by at
/// most one. Throws TooFewExamples if K < 2 or a class has fewer than K members.
FoldAssignment stratified_kfold(std::span<const Label> labels, int k, std::uint64_t seed);

struct FoldResult {
  ConfusionMatrix confusion;
  MetricSet metrics;
  std::vector<std::string> slide_ids;
  std::vector<ScoredLabel> scores;
};

struct EvaluationReport {
  std::string model;
  std::vector<FoldResult> folds;
  MetricSet average;
};

/// Trains a fresh classifier per fold on the other K-1 folds and scores the
/// held-out fold. Folds run on up to `jobs` threads; the fit seed of fold i
/// is derive_seed(seed, "fold-fit/<i>") so results do not depend on `jobs`.
EvaluationReport cross_validate(const Dataset& data, const ClassifierFactory& factory,
                                const FoldAssignment& folds, std::uint64_t seed, int jobs = 1);

// Fold assignment from stratified_kfold(labels, k, derive_seed(seed, "folds")).
FoldAssignment dataset_folds(const Dataset& data, int k, std::uint64_t seed);

EvaluationReport cross_validate(const Dataset& data, const ClassifierFactory& factory, int k,
                                std::uint64_t seed, int jobs = 1);

// `fold,accuracy,sensitivity,precision,f1,auc` with rows 1..K then `average`.
std::string report_csv(const EvaluationReport& report);
// Full precision, including confusion matrices; undefined metrics are null.
std::string report_json(const EvaluationReport& report);
void write_report(const EvaluationReport& report, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path);

// `fold,slide_id` rows; folds numbered from 1.
std::string fold_manifest_csv(const Dataset& data, const FoldAssignment& folds);

}  // namespace slideagg
