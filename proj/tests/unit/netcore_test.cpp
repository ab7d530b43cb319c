#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "slideagg/errors.hpp"
#include "slideagg/model_io.hpp"
#include "slideagg/netcore.hpp"
#include "test_util.hpp"

namespace slideagg::nn {
namespace {

GraphSpec flat_spec(int in, std::vector<int> hidden) {
  GraphSpec spec;
  spec.topology = "test";
  spec.passthrough = {{"x", in}};
  spec.head_hidden = std::move(hidden);
  return spec;
}

GraphSpec small_widedeep_spec(int width, int depth) {
  GraphSpec spec;
  spec.topology = "test";
  const std::vector<int> hidden(static_cast<std::size_t>(depth), width);
  spec.branches = {{"mph", 10, hidden}, {"lsrl", 2, hidden}, {"mcc", 5, hidden}};
  spec.passthrough = {{"mtr", 1}};
  spec.head_hidden = hidden;
  return spec;
}

Inputs<double> single(const std::string& name, Eigen::MatrixXd m) {
  Inputs<double> in;
  in.emplace(name, std::move(m));
  return in;
}

bool same_parameters(const NetworkGraph<double>& a, const NetworkGraph<double>& b) {
  const auto la = a.layers();
  const auto lb = b.layers();
  if (la.size() != lb.size()) return false;
  for (std::size_t i = 0; i < la.size(); ++i)
    if (la[i]->weights != lb[i]->weights || la[i]->biases != lb[i]->biases) return false;
  return true;
}

TEST(InitNetwork, DeterministicPerSeed) {
  const auto spec = small_widedeep_spec(8, 2);
  EXPECT_TRUE(same_parameters(init_network<double>(spec, 1), init_network<double>(spec, 1)));
  EXPECT_FALSE(same_parameters(init_network<double>(spec, 1), init_network<double>(spec, 2)));
}

TEST(InitNetwork, ShapesAndBounds) {
  const auto net = init_network<double>(flat_spec(1, {}), 9);
  ASSERT_EQ(net.head.size(), 1u);
  EXPECT_EQ(net.head[0].weights.rows(), 2);
  EXPECT_EQ(net.head[0].weights.cols(), 1);
  EXPECT_EQ(net.head[0].biases.size(), 2);
  EXPECT_EQ(net.head[0].activation, Activation::Softmax);

  const auto wide = init_network<double>(flat_spec(24, {50}), 3);
  EXPECT_LE(wide.head[0].weights.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 24.0));
  EXPECT_TRUE(wide.head[0].biases.isZero());
  EXPECT_EQ(wide.head[0].activation, Activation::ReLU);
}

TEST(InitNetwork, InvalidTopology) {
  EXPECT_THROW(init_network<double>(GraphSpec{}, 0), Error);
  EXPECT_THROW(init_network<double>(flat_spec(0, {}), 0), Error);
  EXPECT_THROW(init_network<double>(flat_spec(3, {4, 0}), 0), Error);
  auto dup = small_widedeep_spec(4, 1);
  dup.passthrough[0].name = "mph";
  try {
    init_network<double>(dup, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidTopology);
  }
}

TEST(Forward, ZeroWeightsGiveEvenOdds) {
  auto net = init_network<double>(small_widedeep_spec(6, 2), 4);
  net.set_zero();
  std::mt19937_64 rng(1);
  const auto p = forward(net, oracle::random_inputs(net.spec, 3, rng));
  EXPECT_TRUE(p.isConstant(0.5));
}

TEST(Forward, HandComputedTwoByTwo) {
  auto net = init_network<double>(flat_spec(2, {}), 0);
  net.head[0].weights << 1, 2, 3, 4;
  net.head[0].biases << 0.5, -0.5;
  Eigen::MatrixXd x(2, 1);
  x << 1, -1;
  // logits (-0.5, -1.5) -> p_malignant = 1 / (1 + e^-1)
  const auto p = forward(net, single("x", x));
  EXPECT_NEAR(p(0, 0), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(p(1, 0), 1.0 / (1.0 + std::exp(1.0)), 1e-15);
}

TEST(Forward, ProbabilityPairProperty) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    auto net = oracle::random_network(small_widedeep_spec(7, 2), rng);
    const auto p = forward(net, oracle::random_inputs(net.spec, 5, rng));
    EXPECT_TRUE((p.array() >= 0.0).all());
    EXPECT_LT((p.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, StableForLargeLogits) {
  auto net = init_network<double>(flat_spec(1, {}), 0);
  net.head[0].weights << 500, -500;
  Eigen::MatrixXd x(1, 2);
  x << 1, -1;
  const auto p = forward(net, single("x", x));
  EXPECT_TRUE(p.allFinite());
  EXPECT_EQ(p(0, 0), 1.0);
  EXPECT_EQ(p(1, 1), 1.0);
  const auto lg = loss_and_gradients(net, single("x", x), {Label::Normal, Label::Malignant});
  EXPECT_TRUE(std::isfinite(lg.loss));
  EXPECT_NEAR(lg.loss, 1000.0, 1e-9);
}

TEST(Forward, ShapeMismatch) {
  auto net = init_network<double>(small_widedeep_spec(4, 1), 0);
  std::mt19937_64 rng(3);
  auto inputs = oracle::random_inputs(net.spec, 2, rng);
  inputs["mcc"] = Eigen::MatrixXd::Zero(4, 2);
  EXPECT_THROW(forward(net, inputs), Error);
  inputs["mcc"] = Eigen::MatrixXd::Zero(5, 3);
  EXPECT_THROW(forward(net, inputs), Error);
  inputs.erase("mcc");
  EXPECT_THROW(forward(net, inputs), Error);
}

TEST(LossAndGradients, CertainPredictionHasZeroLoss) {
  auto net = init_network<double>(flat_spec(2, {}), 0);
  net.set_zero();
  net.head[0].biases << 1000, -1000;
  const auto lg = loss_and_gradients(net, single("x", Eigen::MatrixXd::Ones(2, 1)), {Label::Malignant});
  EXPECT_EQ(lg.loss, 0.0);
  EXPECT_TRUE(lg.gradients.head[0].biases.allFinite());
}

TEST(LossAndGradients, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto spec = small_widedeep_spec(6, 1 + t % 2);
    const auto net = oracle::random_network(spec, rng);
    std::vector<Label> labels;
    for (int i = 0; i < 4; ++i) labels.push_back(rng() % 2 ? Label::Malignant : Label::Normal);
    const auto r = oracle::finite_difference_check(net, oracle::random_inputs(spec, 4, rng), labels);
    EXPECT_GT(r.checked, 0u);
    EXPECT_LE(r.max_relative_error, 1e-4) << "draw " << t;
  }
}

TEST(LossAndGradients, DuplicateExampleSameAsSingle) {
  std::mt19937_64 rng(8);
  const auto spec = small_widedeep_spec(5, 2);
  const auto net = oracle::random_network(spec, rng);
  const auto one = oracle::random_inputs(spec, 1, rng);
  Inputs<double> two;
  for (const auto& [name, m] : one) {
    Eigen::MatrixXd d(m.rows(), 2);
    d << m, m;
    two.emplace(name, d);
  }
  const auto a = loss_and_gradients(net, one, {Label::Normal});
  const auto b = loss_and_gradients(net, two, {Label::Normal, Label::Normal});
  EXPECT_NEAR(a.loss, b.loss, 1e-15);
  const auto ga = a.gradients.layers();
  const auto gb = b.gradients.layers();
  for (std::size_t l = 0; l < ga.size(); ++l) {
    EXPECT_LT((ga[l]->weights - gb[l]->weights).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((ga[l]->biases - gb[l]->biases).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TrainingSet<double> separable_set() {
  // Two features; malignant iff x0 + x1 > 1 with a margin.
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TrainingSet<double> set;
  Eigen::MatrixXd x(2, 80);
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    double a, b;
    do {
      a = u(rng);
      b = u(rng);
    } while (std::abs(a + b - 1.0) < 0.15);
    x.col(i) << a, b;
    set.labels.push_back(a + b > 1.0 ? Label::Malignant : Label::Normal);
  }
  set.inputs.emplace("x", x);
  return set;
}

TEST(Train, SeparableToyReachesFullAccuracy) {
  const auto set = separable_set();
  TrainConfig config;
  config.epochs = 500;
  config.learning_rate = 1e-2;
  const auto result = train(init_network<double>(flat_spec(2, {16}), 5), set, config);
  ASSERT_EQ(result.loss_trace.size(), 500u);
  EXPECT_LT(result.loss_trace.back(), result.loss_trace.front());
  const auto p = forward(result.network, set.inputs);
  for (Eigen::Index i = 0; i < p.cols(); ++i)
    EXPECT_EQ(p(0, i) >= 0.5 ? Label::Malignant : Label::Normal, set.labels[static_cast<std::size_t>(i)]);
}

TEST(Train, SgdReducesLoss) {
  const auto set = separable_set();
  TrainConfig config;
  config.epochs = 200;
  config.learning_rate = 0.1;
  config.optimizer = Optimizer::SGD;
  const auto result = train(init_network<double>(flat_spec(2, {8}), 5), set, config);
  EXPECT_LT(result.loss_trace.back(), 0.5 * result.loss_trace.front());
}

TEST(Train, RejectsBadConfigAndEmptyData) {
  const auto set = separable_set();
  const auto net = init_network<double>(flat_spec(2, {}), 1);
  TrainConfig config;
  config.epochs = 0;
  EXPECT_THROW(train(net, set, config), Error);
  config.epochs = 1;
  config.learning_rate = -1;
  EXPECT_THROW(train(net, set, config), Error);
  config.learning_rate = 1e-3;
  TrainingSet<double> empty;
  empty.inputs.emplace("x", Eigen::MatrixXd(2, 0));
  try {
    train(net, empty, config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyDataset);
  }
}

TEST(Train, Deterministic) {
  const auto set = separable_set();
  TrainConfig config;
  config.epochs = 50;
  const auto a = train(init_network<double>(flat_spec(2, {8, 8}), 3), set, config);
  const auto b = train(init_network<double>(flat_spec(2, {8, 8}), 3), set, config);
  EXPECT_TRUE(same_parameters(a.network, b.network));
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(ModelFile, ReloadIsBitExact) {
  std::mt19937_64 rng(12);
  const auto spec = small_widedeep_spec(9, 2);
  const auto net = oracle::random_network(spec, rng);
  TrainConfig config;
  config.seed = 0xFFFFFFFFFFFFFFFFULL;
  testing::TempDir dir;
  save_model(net, config, dir / "m.json");
  const auto back = load_model(dir / "m.json");
  EXPECT_TRUE(same_parameters(net, back.network));
  EXPECT_EQ(back.config.seed, config.seed);
  EXPECT_EQ(back.network.spec.topology, "test");
  const auto inputs = oracle::random_inputs(spec, 7, rng);
  EXPECT_EQ(forward(net, inputs), forward(back.network, inputs));
}

TEST(ModelFile, CorruptFilesAreRejected) {
  testing::TempDir dir;
  const auto net = init_network<double>(flat_spec(3, {4}), 1);
  const std::string good = serialize_model(net, TrainConfig{});
  auto code = [&](const std::string& text) {
    testing::write_file(dir / "bad.json", text);
    try {
      load_model(dir / "bad.json");
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::NotFitted;
  };
  EXPECT_EQ(code("not json"), Errc::MalformedModel);
  EXPECT_EQ(code(good.substr(0, good.size() / 2)), Errc::MalformedModel);
  std::string shape = good;
  shape.replace(shape.find("\"head_hidden\":[4]"), 17, "\"head_hidden\":[5]");
  EXPECT_EQ(code(shape), Errc::MalformedModel);
  std::string version = good;
  version.replace(version.find("\"version\":1"), 11, "\"version\":9");
  EXPECT_EQ(code(version), Errc::MalformedModel);
  try {
    load_model(dir / "absent.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingFile);
  }
}

}  // namespace
}  // namespace slideagg::nn
