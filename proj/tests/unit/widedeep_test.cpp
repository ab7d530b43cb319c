#include <gtest/gtest.h>

#include <cmath>

#include "slideagg/errors.hpp"
#include "slideagg/model_io.hpp"
#include "slideagg/synth.hpp"
#include "slideagg/widedeep.hpp"
#include "test_util.hpp"

namespace slideagg {
namespace {

FeatureVector sample_features(double seed) {
  FeatureVector fv;
  fv.mtr = 0.1 * seed;
  for (int i = 0; i < kHistogramBins; ++i) fv.mph(i) = 0.01 * (i + seed);
  fv.lsrl = {0.02 * seed, -0.3};
  for (int i = 0; i < kMccRadiusCount; ++i) fv.mcc(i) = 1.0 / (i + 1 + seed);
  return fv;
}

const Dataset& synthetic_data() {
  static const Dataset data = [] {
    SynthConfig cfg;
    cfg.slides_per_label = 40;
    cfg.seed = 21;
    return extract_dataset(generate_dataset(cfg));
  }();
  return data;
}

WideDeepShape small_shape() { return {32, 2, 32, 2}; }

TEST(WideDeepSpec, FullShape) {
  const auto spec = widedeep_spec();
  EXPECT_EQ(spec.topology, kWideDeepTopology);
  EXPECT_EQ(spec.concat_width(), 901);
  ASSERT_EQ(spec.branches.size(), 3u);
  EXPECT_EQ(spec.branches[0].input_width, 10);
  EXPECT_EQ(spec.branches[1].input_width, 2);
  EXPECT_EQ(spec.branches[2].input_width, 5);
  EXPECT_EQ(spec.head_hidden, (std::vector<int>{300, 300}));
  // branches: 10/2/5 -> 300 -> 300; head: 901 -> 300 -> 300 -> 2
  const auto model = build_widedeep(0);
  EXPECT_EQ(model.network.parameter_count(), 638402);
}

TEST(WideDeepSpec, DeterministicInitialisation) {
  const auto a = build_widedeep(5, small_shape());
  const auto b = build_widedeep(5, small_shape());
  const auto fv = sample_features(1.0);
  EXPECT_EQ(predict_slide(a, fv).p_malignant, predict_slide(b, fv).p_malignant);
  EXPECT_NE(predict_slide(a, fv).p_malignant, predict_slide(build_widedeep(6, small_shape()), fv).p_malignant);
}

TEST(WideDeepInputs, RoutesFeatureGroups) {
  const std::vector<FeatureVector> batch{sample_features(1.0), sample_features(2.0)};
  const auto in = widedeep_inputs(batch);
  ASSERT_EQ(in.size(), 4u);
  for (Eigen::Index c = 0; c < 2; ++c) {
    const auto& fv = batch[static_cast<std::size_t>(c)];
    EXPECT_EQ(in.at(kMphInput).col(c), fv.mph);
    EXPECT_EQ(in.at(kLsrlInput)(0, c), fv.lsrl.slope);
    EXPECT_EQ(in.at(kLsrlInput)(1, c), fv.lsrl.intercept);
    EXPECT_EQ(in.at(kMccInput).col(c), fv.mcc);
    EXPECT_EQ(in.at(kMtrInput)(0, c), fv.mtr);
  }
}

TEST(PredictSlide, ZeroModelIsEvenOddsAndMalignant) {
  auto model = build_widedeep(1, small_shape());
  model.network.set_zero();
  const auto p = predict_slide(model, sample_features(3.0));
  EXPECT_EQ(p.p_malignant, 0.5);
  EXPECT_EQ(p.label, Label::Malignant);
}

TEST(PredictSlide, WidePathCarriesRawRatio) {
  // Only the mtr column of the concatenation feeds the head.
  auto model = build_widedeep(1, small_shape());
  model.network.set_zero();
  const int mtr_column = model.network.spec.concat_width() - 1;
  model.network.head[0].weights(0, mtr_column) = 1.0;
  model.network.head[1].weights(0, 0) = 1.0;
  model.network.head[2].weights(0, 0) = 1.0;
  auto fv = sample_features(2.0);
  fv.mtr = 0.7;
  const double p = predict_slide(model, fv).p_malignant;
  EXPECT_NEAR(p, 1.0 / (1.0 + std::exp(-0.7)), 1e-15);
  fv.mph.setConstant(0.9);
  fv.mcc.setConstant(0.9);
  fv.lsrl = {5, 5};
  EXPECT_EQ(predict_slide(model, fv).p_malignant, p);
}

TEST(PredictSlide, WidePathBypassesBranches) {
  // Random head, but no weight on any branch-derived column: the output can
  // only depend on mtr.
  auto model = build_widedeep(3, small_shape());
  model.network.head[0].weights.leftCols(model.network.spec.concat_width() - 1).setZero();
  auto fv = sample_features(1.0);
  const double p = predict_slide(model, fv).p_malignant;
  fv.mph.setConstant(0.3);
  fv.mcc.setConstant(0.01);
  fv.lsrl = {-4, 2};
  EXPECT_EQ(predict_slide(model, fv).p_malignant, p);
  fv.mtr += 0.5;
  EXPECT_NE(predict_slide(model, fv).p_malignant, p);
}

TEST(LossAndGradients, BranchesAreIsolated) {
  // With a silenced mcc branch, changing mcc inputs leaves the gradients of
  // the mph branch untouched.
  auto net = build_widedeep(4, small_shape()).network;
  for (auto& layer : net.branches[2].layers) {
    layer.weights.setZero();
    layer.biases.setZero();
  }
  std::vector<FeatureVector> batch{sample_features(1.0), sample_features(2.0)};
  const std::vector<Label> labels{Label::Malignant, Label::Normal};
  const auto before = nn::loss_and_gradients(net, widedeep_inputs(batch), labels);
  std::swap(batch[0].mcc(0), batch[0].mcc(4));
  batch[1].mcc.setConstant(0.7);
  const auto after = nn::loss_and_gradients(net, widedeep_inputs(batch), labels);
  ASSERT_EQ(net.branches[0].input, kMphInput);
  for (std::size_t l = 0; l < net.branches[0].layers.size(); ++l) {
    EXPECT_EQ(before.gradients.branches[0].layers[l].weights, after.gradients.branches[0].layers[l].weights);
    EXPECT_EQ(before.gradients.branches[0].layers[l].biases, after.gradients.branches[0].layers[l].biases);
  }
}

TEST(TrainWideDeep, SingleClassRejected) {
  Dataset data{{"a", Label::Normal, sample_features(1)}, {"b", Label::Normal, sample_features(2)}};
  nn::TrainConfig config;
  config.epochs = 1;
  try {
    train_widedeep(data, config, small_shape());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingleClassDataset);
  }
  WideDeepClassifier clf(config, small_shape());
  EXPECT_THROW(clf.predict_proba(sample_features(1)), Error);
  EXPECT_THROW(clf.fit(data, 0), Error);
}

TEST(TrainWideDeep, FitsSyntheticSlides) {
  nn::TrainConfig config;
  config.epochs = 500;
  config.seed = 4;
  std::vector<double> trace;
  const auto model = train_widedeep(synthetic_data(), config, small_shape(), &trace);
  ASSERT_EQ(trace.size(), 500u);
  EXPECT_LT(trace.back(), trace.front());
  int correct = 0;
  for (const auto& s : synthetic_data()) correct += predict_slide(model, s.features).label == s.label;
  EXPECT_GE(correct, static_cast<int>(0.99 * static_cast<double>(synthetic_data().size())));
  // A slide without any malignant evidence reads as normal.
  EXPECT_EQ(predict_slide(model, FeatureVector{}).label, Label::Normal);
}

TEST(TrainWideDeep, DeterministicAndReloadable) {
  nn::TrainConfig config;
  config.epochs = 20;
  config.seed = 8;
  const auto a = train_widedeep(synthetic_data(), config, small_shape());
  const auto b = train_widedeep(synthetic_data(), config, small_shape());
  testing::TempDir dir;
  save_widedeep(a, dir / "m.json");
  const auto c = load_widedeep(dir / "m.json");
  EXPECT_EQ(c.config.seed, 8u);
  for (const auto& s : synthetic_data()) {
    const double p = predict_slide(a, s.features).p_malignant;
    EXPECT_EQ(p, predict_slide(b, s.features).p_malignant);
    EXPECT_EQ(p, predict_slide(c, s.features).p_malignant);
  }
}

TEST(LoadWideDeep, RejectsOtherTopologies) {
  nn::GraphSpec spec;
  spec.topology = "something-else";
  spec.passthrough = {{"x", 3}};
  testing::TempDir dir;
  save_model(nn::init_network<double>(spec, 0), nn::TrainConfig{}, dir / "other.json");
  try {
    load_widedeep(dir / "other.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedModel);
  }
}

TEST(WideDeepClassifier, SeedOverridesConfig) {
  nn::TrainConfig config;
  config.epochs = 5;
  WideDeepClassifier a(config, small_shape()), b(config, small_shape());
  a.fit(synthetic_data(), 1);
  b.fit(synthetic_data(), 2);
  ASSERT_TRUE(a.model().has_value());
  EXPECT_EQ(a.model()->config.seed, 1u);
  EXPECT_NE(a.predict_proba(sample_features(1)), b.predict_proba(sample_features(1)));
}

}  // namespace
}  // namespace slideagg
