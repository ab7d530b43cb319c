#include "slideagg/netcore.hpp"

namespace slideagg::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  if (s == "softmax") return Activation::Softmax;
  throw Error(Errc::MalformedModel, "unknown activation '" + std::string(s) + "'");
}

std::string_view to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(std::string_view s) {
  if (s == "adam") return Optimizer::Adam;
  if (s == "sgd") return Optimizer::SGD;
  throw Error(Errc::InvalidConfig, "unknown optimizer '" + std::string(s) + "'");
}

int GraphSpec::concat_width() const {
  int w = 0;
  for (const auto& b : branches) w += b.output_width();
  for (const auto& p : passthrough) w += p.width;
  return w;
}

void GraphSpec::validate() const {
  if (branches.empty() && passthrough.empty())
    throw Error(Errc::InvalidTopology, "graph has no inputs");
  std::set<std::string, std::less<>> names;
  auto check_name = [&](const std::string& name) {
    if (name.empty()) throw Error(Errc::InvalidTopology, "input with empty name");
    if (!names.insert(name).second) throw Error(Errc::InvalidTopology, "duplicate input '" + name + "'");
  };
  for (const auto& b : branches) {
    check_name(b.name);
    if (b.input_width <= 0) throw Error(Errc::InvalidTopology, "branch '" + b.name + "' has no input width");
    for (int h : b.hidden)
      if (h <= 0) throw Error(Errc::InvalidTopology, "branch '" + b.name + "' has a non-positive layer width");
  }
  for (const auto& p : passthrough) {
    check_name(p.name);
    if (p.width <= 0) throw Error(Errc::InvalidTopology, "pass-through '" + p.name + "' has no width");
  }
  for (int h : head_hidden)
    if (h <= 0) throw Error(Errc::InvalidTopology, "head has a non-positive layer width");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(Errc::InvalidConfig, "learning rate must be finite and positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_epsilon > 0.0))
    throw Error(Errc::InvalidConfig, "invalid Adam constants");
}

}  // namespace slideagg::nn
