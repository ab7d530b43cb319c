#include "slideagg/evaluation.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include <json.hpp>

#include "slideagg/csv.hpp"
#include "slideagg/errors.hpp"
#include "slideagg/parallel.hpp"
#include "slideagg/seeds.hpp"

namespace slideagg {

void ConfusionMatrix::add(Label truth, Label predicted) {
  if (truth == Label::Malignant)
    (predicted == Label::Malignant ? tp : fn) += 1;
  else
    (predicted == Label::Malignant ? fp : tn) += 1;
}

std::optional<double> f1_score(double precision, double sensitivity) {
  if (precision + sensitivity == 0.0) return std::nullopt;
  return 2.0 * (precision * sensitivity) / (precision + sensitivity);
}

MetricSet compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(Errc::EmptyEvaluation, "no evaluated slides");
  const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  MetricSet m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  if (m.precision && m.sensitivity) m.f1 = f1_score(*m.precision, *m.sensitivity);
  return m;
}

MetricSet average_metrics(std::span<const MetricSet> rows) {
  const auto mean = [&](std::optional<double> MetricSet::*field) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows)
      if (const auto& v = r.*field) {
        sum += *v;
        ++n;
      }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  return {mean(&MetricSet::accuracy), mean(&MetricSet::sensitivity), mean(&MetricSet::precision),
          mean(&MetricSet::f1), mean(&MetricSet::auc)};
}

double roc_auc(std::span<const ScoredLabel> scores) {
  std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.p_malignant < b.p_malignant; });
  double rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].p_malignant == sorted[i].p_malignant) ++j;
    // Ranks i+1 .. j share their average.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (sorted[t].truth == Label::Malignant) {
        rank_sum += rank;
        positives += 1.0;
      }
    i = j;
  }
  const double negatives = static_cast<double>(sorted.size()) - positives;
  if (positives == 0.0 || negatives == 0.0)
    throw Error(Errc::SingleClassScores, "AUC needs both malignant and normal scores");
  const double u = rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

FoldAssignment stratified_kfold(std::span<const Label> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error(Errc::TooFewExamples, "K must be at least 2");
  std::vector<std::size_t> malignant, normal;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == Label::Malignant ? malignant : normal).push_back(i);
  if (malignant.size() < static_cast<std::size_t>(k) || normal.size() < static_cast<std::size_t>(k))
    throw Error(Errc::TooFewExamples, "each label needs at least K = " + std::to_string(k) + " slides");

  std::mt19937_64 rng(seed);
  std::shuffle(malignant.begin(), malignant.end(), rng);
  std::shuffle(normal.begin(), normal.end(), rng);

  FoldAssignment folds(static_cast<std::size_t>(k));
  std::size_t pos = 0;
  for (const auto* cls : {&malignant, &normal})
    for (std::size_t idx : *cls) folds[pos++ % folds.size()].push_back(idx);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

FoldAssignment dataset_folds(const Dataset& data, int k, std::uint64_t seed) {
  std::vector<Label> labels;
  labels.reserve(data.size());
  for (const auto& s : data) labels.push_back(s.label);
  return stratified_kfold(labels, k, derive_seed(seed, "folds"));
}

EvaluationReport cross_validate(const Dataset& data, const ClassifierFactory& factory,
                                const FoldAssignment& folds, std::uint64_t seed, int jobs) {
  EvaluationReport report;
  report.model = factory()->name();
  report.folds.resize(folds.size());

  std::vector<int> fold_of(data.size(), -1);
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (std::size_t idx : folds[f]) {
      if (idx >= data.size() || fold_of[idx] != -1)
        throw Error(Errc::InvalidConfig, "fold assignment is not a partition of the dataset");
      fold_of[idx] = static_cast<int>(f);
    }

  parallel_for(folds.size(), jobs, [&](std::size_t f) {
    Dataset train;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (fold_of[i] != static_cast<int>(f)) train.push_back(data[i]);
    auto classifier = factory();
    classifier->fit(train, derive_seed(seed, "fold-fit/" + std::to_string(f)));

    FoldResult& result = report.folds[f];
    for (std::size_t idx : folds[f]) {
      const auto& s = data[idx];
      const double p = classifier->predict_proba(s.features);
      result.confusion.add(s.label, p >= kMalignantThreshold ? Label::Malignant : Label::Normal);
      result.slide_ids.push_back(s.slide_id);
      result.scores.push_back({p, s.label});
    }
    result.metrics = compute_metrics(result.confusion);
    try {
      result.metrics.auc = roc_auc(result.scores);
    } catch (const Error&) {
      // single-class fold: AUC undefined
    }
  });

  std::vector<MetricSet> rows;
  for (const auto& f : report.folds) rows.push_back(f.metrics);
  report.average = average_metrics(rows);
  return report;
}

EvaluationReport cross_validate(const Dataset& data, const ClassifierFactory& factory, int k,
                                std::uint64_t seed, int jobs) {
  return cross_validate(data, factory, dataset_folds(data, k, seed), seed, jobs);
}

namespace {

std::string cell(const std::optional<double>& v, int decimals) {
  return v ? csv::format_fixed(*v, decimals) : std::string();
}

std::string metric_row(const std::string& head, const MetricSet& m) {
  return head + ',' + cell(m.accuracy, 4) + ',' + cell(m.sensitivity, 4) + ',' + cell(m.precision, 4) + ',' +
         cell(m.f1, 4) + ',' + cell(m.auc, 4) + '\n';
}

nlohmann::json metrics_json(const MetricSet& m) {
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"accuracy", opt(m.accuracy)},
          {"sensitivity", opt(m.sensitivity)},
          {"precision", opt(m.precision)},
          {"f1", opt(m.f1)},
          {"auc", opt(m.auc)}};
}

}  // namespace

std::string report_csv(const EvaluationReport& report) {
  std::string out = "fold,accuracy,sensitivity,precision,f1,auc\n";
  for (std::size_t f = 0; f < report.folds.size(); ++f)
    out += metric_row(std::to_string(f + 1), report.folds[f].metrics);
  out += metric_row("average", report.average);
  return out;
}

std::string report_json(const EvaluationReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto& r = report.folds[f];
    nlohmann::json predictions = nlohmann::json::array();
    for (std::size_t i = 0; i < r.slide_ids.size(); ++i)
      predictions.push_back({{"slide_id", r.slide_ids[i]},
                             {"label", to_string(r.scores[i].truth)},
                             {"p_malignant", r.scores[i].p_malignant}});
    folds.push_back({{"fold", f + 1},
                     {"confusion", {{"tp", r.confusion.tp}, {"tn", r.confusion.tn}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}}},
                     {"metrics", metrics_json(r.metrics)},
                     {"predictions", std::move(predictions)}});
  }
  nlohmann::json doc = {{"model", report.model}, {"folds", std::move(folds)}, {"average", metrics_json(report.average)}};
  return doc.dump(2) + "\n";
}

void write_report(const EvaluationReport& report, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path) {
  {
    auto out = csv::open_for_write(csv_path);
    out << report_csv(report);
    if (!out) throw Error(Errc::WriteFailed, csv_path.string());
  }
  auto out = csv::open_for_write(json_path);
  out << report_json(report);
  if (!out) throw Error(Errc::WriteFailed, json_path.string());
}

std::string fold_manifest_csv(const Dataset& data, const FoldAssignment& folds) {
  std::string out = "fold,slide_id\n";
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (std::size_t idx : folds[f]) out += std::to_string(f + 1) + ',' + data[idx].slide_id + '\n';
  return out;
}

}  // namespace slideagg
