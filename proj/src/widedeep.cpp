#include "slideagg/widedeep.hpp"

#include "slideagg/model_io.hpp"

namespace slideagg {

void require_both_labels(const Dataset& data) {
  bool malignant = false;
  bool normal = false;
  for (const auto& s : data) (s.label == Label::Malignant ? malignant : normal) = true;
  if (!malignant || !normal)
    throw Error(Errc::SingleClassDataset, "training data must contain both malignant and normal slides");
}

nn::GraphSpec widedeep_spec(const WideDeepShape& shape) {
  const std::vector<int> branch(static_cast<std::size_t>(shape.branch_depth), shape.branch_width);
  nn::GraphSpec spec;
  spec.topology = kWideDeepTopology;
  spec.branches = {{kMphInput, kHistogramBins, branch},
                   {kLsrlInput, 2, branch},
                   {kMccInput, kMccRadiusCount, branch}};
  spec.passthrough = {{kMtrInput, 1}};
  spec.head_hidden.assign(static_cast<std::size_t>(shape.head_depth), shape.head_width);
  return spec;
}

WideDeepModel build_widedeep(std::uint64_t seed, const WideDeepShape& shape) {
  WideDeepModel model{nn::init_network<double>(widedeep_spec(shape), seed), {}};
  model.config.seed = seed;
  return model;
}

nn::Inputs<double> widedeep_inputs(const std::vector<FeatureVector>& batch) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd mph(kHistogramBins, n), lsrl(2, n), mcc(kMccRadiusCount, n), mtr(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& fv = batch[static_cast<std::size_t>(i)];
    mph.col(i) = fv.mph;
    lsrl.col(i) << fv.lsrl.slope, fv.lsrl.intercept;
    mcc.col(i) = fv.mcc;
    mtr(0, i) = fv.mtr;
  }
  nn::Inputs<double> inputs;
  inputs.emplace(kMphInput, std::move(mph));
  inputs.emplace(kLsrlInput, std::move(lsrl));
  inputs.emplace(kMccInput, std::move(mcc));
  inputs.emplace(kMtrInput, std::move(mtr));
  return inputs;
}

nn::Inputs<double> widedeep_inputs(const Dataset& data) {
  std::vector<FeatureVector> batch;
  batch.reserve(data.size());
  for (const auto& s : data) batch.push_back(s.features);
  return widedeep_inputs(batch);
}

SlidePrediction predict_slide(const WideDeepModel& model, const FeatureVector& fv) {
  const Eigen::MatrixXd p = nn::forward(model.network, widedeep_inputs(std::vector<FeatureVector>{fv}));
  const double pm = p(0, 0);
  return {pm >= kMalignantThreshold ? Label::Malignant : Label::Normal, pm};
}

WideDeepModel train_widedeep(const Dataset& data, const nn::TrainConfig& config, const WideDeepShape& shape,
                             std::vector<double>* loss_trace) {
  config.validate();
  if (data.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  require_both_labels(data);
  nn::TrainingSet<double> set{widedeep_inputs(data), {}};
  for (const auto& s : data) set.labels.push_back(s.label);
  auto result = nn::train(nn::init_network<double>(widedeep_spec(shape), config.seed), set, config);
  if (loss_trace) *loss_trace = std::move(result.loss_trace);
  return {std::move(result.network), config};
}

WideDeepModel load_widedeep(const std::filesystem::path& path) {
  auto file = load_model(path);
  if (file.network.spec.topology != kWideDeepTopology)
    throw Error(Errc::MalformedModel, path.string() + ": topology is '" + file.network.spec.topology +
                                          "', expected '" + kWideDeepTopology + "'");
  return {std::move(file.network), file.config};
}

void save_widedeep(const WideDeepModel& model, const std::filesystem::path& path) {
  save_model(model.network, model.config, path);
}

void WideDeepClassifier::fit(const Dataset& train, std::uint64_t seed) {
  auto config = config_;
  config.seed = seed;
  model_ = train_widedeep(train, config, shape_);
}

double WideDeepClassifier::predict_proba(const FeatureVector& fv) const {
  if (!model_) throw Error(Errc::NotFitted, "wide & deep model has not been trained");
  return predict_slide(*model_, fv).p_malignant;
}

}  // namespace slideagg
