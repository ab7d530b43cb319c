#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slideagg/evaluation.hpp"
#include "slideagg/netcore.hpp"
#include "slideagg/widedeep.hpp"

namespace slideagg {

enum class ClassifierKind { WideDeep, ANN, LinearSVM, RandomForest, KNN };

// "widedeep", "ann", "svm", "rf", "knn".
std::string_view to_string(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier_kind(std::string_view name);
inline const std::vector<ClassifierKind>& all_classifier_kinds() {
  static const std::vector<ClassifierKind> kinds{ClassifierKind::WideDeep, ClassifierKind::ANN,
                                                 ClassifierKind::LinearSVM, ClassifierKind::RandomForest,
                                                 ClassifierKind::KNN};
  return kinds;
}

struct SvmConfig {
  double lambda = 1e-4;
  int epochs = 20;
};

struct ForestConfig {
  int trees = 100;
  int features_per_split = 4;  // floor(sqrt(18))
};

struct KnnConfig {
  int k = 5;
};

struct ClassifierConfigs {
  nn::TrainConfig network;  // shared by the wide & deep model and the ANN
  WideDeepShape widedeep;
  std::vector<int> ann_hidden{300, 300};
  SvmConfig svm;
  ForestConfig forest;
  KnnConfig knn;
};

// Two ReLU hidden layers on the flat 18-feature vector, then a softmax pair.
class AnnClassifier : public Classifier {
 public:
  AnnClassifier(nn::TrainConfig config, std::vector<int> hidden);
  std::string name() const override { return "ann"; }
  void fit(const Dataset& train, std::uint64_t seed) override;
  double predict_proba(const FeatureVector& fv) const override;

 private:
  nn::TrainConfig config_;
  nn::GraphSpec spec_;
  std::optional<nn::NetworkGraph<double>> network_;
};

// Linear SVM trained with Pegasos (hinge loss, stochastic sub-gradient, a
// constant feature for the bias). Probability = logistic(margin).
class LinearSvmClassifier : public Classifier {
 public:
  explicit LinearSvmClassifier(SvmConfig config) : config_(config) {}
  std::string name() const override { return "svm"; }
  void fit(const Dataset& train, std::uint64_t seed) override;
  double predict_proba(const FeatureVector& fv) const override;
  double margin(const FeatureVector& fv) const;

  // Weights over the 18 features followed by the bias term.
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  SvmConfig config_;
  Eigen::VectorXd weights_;
};

// Fully grown classification tree; leaves hold the majority class.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left iff x[feature] <= threshold
    int left = -1;
    int right = -1;
    Label leaf = Label::Malignant;
  };
  std::vector<Node> nodes;

  Label predict(const FlatFeatures& x) const;
};

// Gini-impurity trees on bootstrap samples; probability = share of trees voting malignant.
class RandomForestClassifier : public Classifier {
 public:
  explicit RandomForestClassifier(ForestConfig config) : config_(config) {}
  std::string name() const override { return "rf"; }
  // Tree i uses derive_seed(seed, "tree/<i>").
  void fit(const Dataset& train, std::uint64_t seed) override;
  double predict_proba(const FeatureVector& fv) const override;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  void set_trees(std::vector<DecisionTree> trees) { trees_ = std::move(trees); }

 private:
  ForestConfig config_;
  std::vector<DecisionTree> trees_;
};

// Euclidean k-NN over flattened features. Equal distances are ordered by
// training index; probability = malignant share of the k neighbours.
class KnnClassifier : public Classifier {
 public:
  explicit KnnClassifier(KnnConfig config) : config_(config) {}
  std::string name() const override { return "knn"; }
  void fit(const Dataset& train, std::uint64_t seed) override;
  double predict_proba(const FeatureVector& fv) const override;

  // Training indices of the nearest neighbours, closest first.
  std::vector<std::size_t> neighbours(const FeatureVector& fv) const;
  const Dataset& training_set() const { return train_; }

 private:
  KnnConfig config_;
  Dataset train_;
  Eigen::Matrix<double, kFeatureCount, Eigen::Dynamic> points_;
  bool fitted_ = false;
};

ClassifierFactory make_factory(ClassifierKind kind, const ClassifierConfigs& configs);

struct ComparisonTable {
  FoldAssignment folds;
  std::vector<EvaluationReport> reports;  // one per requested classifier, in request order
};

/// Cross-validates every requested classifier on one shared fold assignment.
ComparisonTable run_comparison(const Dataset& data, int k, std::uint64_t seed,
                               const std::vector<ClassifierKind>& kinds, const ClassifierConfigs& configs,
                               int jobs = 1);

// `model,accuracy,sensitivity,precision,f1,auc`, one averaged row per classifier.
std::string comparison_csv(const ComparisonTable& table);

}  // namespace slideagg
