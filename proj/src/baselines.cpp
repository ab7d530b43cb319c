#include "slideagg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "slideagg/csv.hpp"
#include "slideagg/seeds.hpp"

namespace slideagg {

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::WideDeep: return "widedeep";
    case ClassifierKind::ANN: return "ann";
    case ClassifierKind::LinearSVM: return "svm";
    case ClassifierKind::RandomForest: return "rf";
    case ClassifierKind::KNN: return "knn";
  }
  return "?";
}

std::optional<ClassifierKind> parse_classifier_kind(std::string_view name) {
  for (auto kind : all_classifier_kinds())
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

// ---------------------------------------------------------------- ANN

namespace {
constexpr const char* kAnnInput = "features";

nn::Inputs<double> flat_inputs(const std::vector<FlatFeatures>& rows) {
  Eigen::MatrixXd x(kFeatureCount, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = rows[i];
  nn::Inputs<double> inputs;
  inputs.emplace(kAnnInput, std::move(x));
  return inputs;
}
}  // namespace

AnnClassifier::AnnClassifier(nn::TrainConfig config, std::vector<int> hidden) : config_(config) {
  spec_.topology = "ann-v1";
  spec_.passthrough = {{kAnnInput, kFeatureCount}};
  spec_.head_hidden = std::move(hidden);
  spec_.validate();
}

void AnnClassifier::fit(const Dataset& train, std::uint64_t seed) {
  if (train.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  require_both_labels(train);
  std::vector<FlatFeatures> rows;
  nn::TrainingSet<double> set;
  for (const auto& s : train) {
    rows.push_back(s.features.flatten());
    set.labels.push_back(s.label);
  }
  set.inputs = flat_inputs(rows);
  network_ = nn::train(nn::init_network<double>(spec_, seed), set, config_).network;
}

double AnnClassifier::predict_proba(const FeatureVector& fv) const {
  if (!network_) throw Error(Errc::NotFitted, "ANN has not been trained");
  return nn::forward(*network_, flat_inputs({fv.flatten()}))(0, 0);
}

// ---------------------------------------------------------------- SVM

namespace {
Eigen::VectorXd augmented(const FeatureVector& fv) {
  Eigen::VectorXd x(kFeatureCount + 1);
  x << fv.flatten(), 1.0;
  return x;
}
}  // namespace

void LinearSvmClassifier::fit(const Dataset& train, std::uint64_t seed) {
  if (train.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  require_both_labels(train);
  if (!(config_.lambda > 0.0) || config_.epochs < 1) throw Error(Errc::InvalidConfig, "invalid SVM settings");

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  for (const auto& s : train) {
    xs.push_back(augmented(s.features));
    ys.push_back(s.label == Label::Malignant ? 1.0 : -1.0);
  }
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);

  const double lambda = config_.lambda;
  const double radius = 1.0 / std::sqrt(lambda);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(kFeatureCount + 1);
  long long t = 0;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const bool violated = ys[i] * w.dot(xs[i]) < 1.0;
      w *= 1.0 - eta * lambda;
      if (violated) w += eta * ys[i] * xs[i];
      // Pegasos projection onto the ball of radius 1/sqrt(lambda).
      if (const double norm = w.norm(); norm > radius) w *= radius / norm;
    }
  }
  weights_ = std::move(w);
}

double LinearSvmClassifier::margin(const FeatureVector& fv) const {
  if (weights_.size() == 0) throw Error(Errc::NotFitted, "SVM has not been trained");
  return weights_.dot(augmented(fv));
}

double LinearSvmClassifier::predict_proba(const FeatureVector& fv) const {
  return 1.0 / (1.0 + std::exp(-margin(fv)));
}

// ---------------------------------------------------------------- Random forest

Label DecisionTree::predict(const FlatFeatures& x) const {
  int i = 0;
  while (nodes[i].feature >= 0) i = x(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].leaf;
}

namespace {

double gini(double malignant, double total) {
  if (total == 0.0) return 0.0;
  const double p = malignant / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // size-weighted child Gini
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<FlatFeatures>& x, const std::vector<Label>& y, int mtry, std::uint64_t seed)
      : x_(x), y_(y), mtry_(mtry), rng_(seed) {}

  DecisionTree build(std::vector<std::size_t> samples) {
    DecisionTree tree;
    tree.nodes.emplace_back();
    struct Pending {
      int node;
      std::vector<std::size_t> samples;
    };
    std::vector<Pending> stack;
    stack.push_back({0, std::move(samples)});
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      const auto malignant = static_cast<std::size_t>(std::count_if(
          job.samples.begin(), job.samples.end(), [&](std::size_t i) { return y_[i] == Label::Malignant; }));
      // Majority class, ties to malignant.
      tree.nodes[job.node].leaf = 2 * malignant >= job.samples.size() ? Label::Malignant : Label::Normal;
      if (malignant == 0 || malignant == job.samples.size()) continue;

      const Split split = best_split(job.samples, static_cast<double>(malignant));
      if (split.feature < 0) continue;

      std::vector<std::size_t> left, right;
      for (std::size_t i : job.samples) (x_[i](split.feature) <= split.threshold ? left : right).push_back(i);
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[job.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = l;
      node.right = l + 1;
      stack.push_back({l + 1, std::move(right)});
      stack.push_back({l, std::move(left)});
    }
    return tree;
  }

 private:
  // Tries mtry random features first; if none of them can separate the
  // samples, falls back to the remaining features so impure nodes keep growing.
  Split best_split(const std::vector<std::size_t>& samples, double malignant) {
    std::vector<int> features(kFeatureCount);
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng_);
    Split best;
    for (int tried = 0; tried < kFeatureCount; ++tried) {
      if (tried == mtry_ && best.feature >= 0) break;
      scan_feature(features[tried], samples, malignant, best);
    }
    return best;
  }

  void scan_feature(int f, const std::vector<std::size_t>& samples, double malignant, Split& best) const {
    std::vector<std::pair<double, bool>> values;
    values.reserve(samples.size());
    for (std::size_t i : samples) values.emplace_back(x_[i](f), y_[i] == Label::Malignant);
    std::sort(values.begin(), values.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const double total = static_cast<double>(values.size());
    double left_malignant = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      left_malignant += values[i].second ? 1.0 : 0.0;
      if (values[i].first == values[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = total - nl;
      const double impurity = nl * gini(left_malignant, nl) + nr * gini(malignant - left_malignant, nr);
      if (best.feature < 0 || impurity < best.impurity) {
        double threshold = 0.5 * (values[i].first + values[i + 1].first);
        if (threshold >= values[i + 1].first) threshold = values[i].first;
        best = {f, threshold, impurity};
      }
    }
  }

  const std::vector<FlatFeatures>& x_;
  const std::vector<Label>& y_;
  int mtry_;
  std::mt19937_64 rng_;
};

}  // namespace

void RandomForestClassifier::fit(const Dataset& train, std::uint64_t seed) {
  if (train.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  require_both_labels(train);
  if (config_.trees < 1 || config_.features_per_split < 1 || config_.features_per_split > kFeatureCount)
    throw Error(Errc::InvalidConfig, "invalid random forest settings");

  std::vector<FlatFeatures> x;
  std::vector<Label> y;
  for (const auto& s : train) {
    x.push_back(s.features.flatten());
    y.push_back(s.label);
  }
  std::vector<DecisionTree> trees(static_cast<std::size_t>(config_.trees));
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, "tree/" + std::to_string(t));
    std::mt19937_64 rng(tree_seed);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<std::size_t> bootstrap(x.size());
    for (auto& i : bootstrap) i = pick(rng);
    trees[t] = TreeBuilder(x, y, config_.features_per_split, splitmix64(tree_seed)).build(std::move(bootstrap));
  }
  trees_ = std::move(trees);
}

double RandomForestClassifier::predict_proba(const FeatureVector& fv) const {
  if (trees_.empty()) throw Error(Errc::NotFitted, "random forest has not been trained");
  const FlatFeatures x = fv.flatten();
  const auto votes = std::count_if(trees_.begin(), trees_.end(),
                                   [&](const DecisionTree& t) { return t.predict(x) == Label::Malignant; });
  return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

// ---------------------------------------------------------------- KNN

void KnnClassifier::fit(const Dataset& train, std::uint64_t) {
  if (train.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  if (config_.k < 1) throw Error(Errc::InvalidConfig, "k must be >= 1");
  train_ = train;
  points_.resize(kFeatureCount, static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) points_.col(static_cast<Eigen::Index>(i)) = train[i].features.flatten();
  fitted_ = true;
}

std::vector<std::size_t> KnnClassifier::neighbours(const FeatureVector& fv) const {
  if (!fitted_) throw Error(Errc::NotFitted, "k-NN has not been fitted");
  const Eigen::VectorXd d2 = (points_.colwise() - fv.flatten()).colwise().squaredNorm().transpose();
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config_.k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto da = d2(static_cast<Eigen::Index>(a));
                      const auto db = d2(static_cast<Eigen::Index>(b));
                      return da < db || (da == db && a < b);
                    });
  order.resize(k);
  return order;
}

double KnnClassifier::predict_proba(const FeatureVector& fv) const {
  const auto nn = neighbours(fv);
  const auto malignant = std::count_if(nn.begin(), nn.end(),
                                       [&](std::size_t i) { return train_[i].label == Label::Malignant; });
  return static_cast<double>(malignant) / static_cast<double>(nn.size());
}

// ---------------------------------------------------------------- comparison

ClassifierFactory make_factory(ClassifierKind kind, const ClassifierConfigs& configs) {
  switch (kind) {
    case ClassifierKind::WideDeep:
      return [c = configs] { return std::make_unique<WideDeepClassifier>(c.network, c.widedeep); };
    case ClassifierKind::ANN:
      return [c = configs] { return std::make_unique<AnnClassifier>(c.network, c.ann_hidden); };
    case ClassifierKind::LinearSVM:
      return [c = configs] { return std::make_unique<LinearSvmClassifier>(c.svm); };
    case ClassifierKind::RandomForest:
      return [c = configs] { return std::make_unique<RandomForestClassifier>(c.forest); };
    case ClassifierKind::KNN:
      return [c = configs] { return std::make_unique<KnnClassifier>(c.knn); };
  }
  throw Error(Errc::InvalidConfig, "unknown classifier kind");
}

ComparisonTable run_comparison(const Dataset& data, int k, std::uint64_t seed,
                               const std::vector<ClassifierKind>& kinds, const ClassifierConfigs& configs,
                               int jobs) {
  ComparisonTable table;
  table.folds = dataset_folds(data, k, seed);
  for (auto kind : kinds)
    table.reports.push_back(cross_validate(data, make_factory(kind, configs), table.folds, seed, jobs));
  return table;
}

std::string comparison_csv(const ComparisonTable& table) {
  const auto cell = [](const std::optional<double>& v) { return v ? csv::format_fixed(*v, 4) : std::string(); };
  std::string out = "model,accuracy,sensitivity,precision,f1,auc\n";
  for (const auto& r : table.reports) {
    const auto& m = r.average;
    out += r.model + ',' + cell(m.accuracy) + ',' + cell(m.sensitivity) + ',' + cell(m.precision) + ',' +
           cell(m.f1) + ',' + cell(m.auc) + '\n';
  }
  return out;
}

}  // namespace slideagg
