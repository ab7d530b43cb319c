#pragma once

// Small dense-network engine: named input branches of dense layers, a
// concatenation node that also takes raw pass-through inputs, and a head
// ending in a two-way softmax (malignant, normal). Everything is full-batch
// and column-major: an input matrix has one column per example.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "slideagg/errors.hpp"
#include "slideagg/types.hpp"

namespace slideagg::nn {

enum class Activation { ReLU, Identity, Softmax };
enum class Optimizer { SGD, Adam };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);
std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view s);

inline constexpr int kOutputWidth = 2;

struct BranchSpec {
  std::string name;
  int input_width = 0;
  std::vector<int> hidden;

  int output_width() const { return hidden.empty() ? input_width : hidden.back(); }
};

struct PassthroughSpec {
  std::string name;
  int width = 0;
};

// Concatenation order: branch outputs in declaration order, then pass-through
// inputs in declaration order.
struct GraphSpec {
  std::string topology;
  std::vector<BranchSpec> branches;
  std::vector<PassthroughSpec> passthrough;
  std::vector<int> head_hidden;

  int concat_width() const;
  // Throws InvalidTopology on non-positive widths, duplicate input names or no inputs.
  void validate() const;
};

struct TrainConfig {
  int epochs = 10000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;  // parameter initialization
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // Throws InvalidConfig.
  void validate() const;
};

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weights;  // out x in
  VectorX<Scalar> biases;   // out
  Activation activation = Activation::Identity;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
  Eigen::Index parameter_count() const { return weights.size() + biases.size(); }
};

template <typename Scalar>
struct Branch {
  std::string input;
  std::vector<DenseLayer<Scalar>> layers;
};

template <typename Scalar>
struct NetworkGraph {
  GraphSpec spec;
  std::vector<Branch<Scalar>> branches;
  std::vector<DenseLayer<Scalar>> head;

  // Every layer in a fixed order: branches first, then the head.
  std::vector<DenseLayer<Scalar>*> layers() {
    std::vector<DenseLayer<Scalar>*> out;
    for (auto& b : branches)
      for (auto& l : b.layers) out.push_back(&l);
    for (auto& l : head) out.push_back(&l);
    return out;
  }
  std::vector<const DenseLayer<Scalar>*> layers() const {
    std::vector<const DenseLayer<Scalar>*> out;
    for (const auto& b : branches)
      for (const auto& l : b.layers) out.push_back(&l);
    for (const auto& l : head) out.push_back(&l);
    return out;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto* l : layers()) n += l->parameter_count();
    return n;
  }

  void set_zero() {
    for (auto* l : layers()) {
      l->weights.setZero();
      l->biases.setZero();
    }
  }
};

// Gradients (and optimizer moments) share the parameter layout exactly.
template <typename Scalar>
using Gradients = NetworkGraph<Scalar>;

// Named inputs, one matrix per branch / pass-through, width x batch.
template <typename Scalar>
using Inputs = std::map<std::string, MatrixX<Scalar>, std::less<>>;

template <typename Scalar>
struct ProbabilityPair {
  Scalar malignant;
  Scalar normal;
};

namespace detail {

template <typename Scalar>
DenseLayer<Scalar> make_layer(Eigen::Index in, Eigen::Index out, Activation act) {
  return {MatrixX<Scalar>::Zero(out, in), VectorX<Scalar>::Zero(out), act};
}

template <typename Scalar>
NetworkGraph<Scalar> shape_network(const GraphSpec& spec) {
  spec.validate();
  NetworkGraph<Scalar> net;
  net.spec = spec;
  for (const auto& b : spec.branches) {
    Branch<Scalar> branch{b.name, {}};
    Eigen::Index in = b.input_width;
    for (int width : b.hidden) {
      branch.layers.push_back(make_layer<Scalar>(in, width, Activation::ReLU));
      in = width;
    }
    net.branches.push_back(std::move(branch));
  }
  Eigen::Index in = spec.concat_width();
  for (int width : spec.head_hidden) {
    net.head.push_back(make_layer<Scalar>(in, width, Activation::ReLU));
    in = width;
  }
  net.head.push_back(make_layer<Scalar>(in, kOutputWidth, Activation::Softmax));
  return net;
}

template <typename Scalar>
Eigen::Index batch_size(const NetworkGraph<Scalar>& net, const Inputs<Scalar>& inputs) {
  Eigen::Index cols = -1;
  auto check = [&](const std::string& name, int width) {
    const auto it = inputs.find(name);
    if (it == inputs.end()) throw Error(Errc::ShapeMismatch, "missing input '" + name + "'");
    if (it->second.rows() != width)
      throw Error(Errc::ShapeMismatch, "input '" + name + "' has width " +
                                           std::to_string(it->second.rows()) + ", expected " +
                                           std::to_string(width));
    if (cols >= 0 && it->second.cols() != cols)
      throw Error(Errc::ShapeMismatch, "inputs disagree on batch size");
    cols = it->second.cols();
  };
  for (const auto& b : net.spec.branches) check(b.name, b.input_width);
  for (const auto& p : net.spec.passthrough) check(p.name, p.width);
  if (inputs.size() != net.spec.branches.size() + net.spec.passthrough.size())
    throw Error(Errc::ShapeMismatch, "unexpected extra inputs");
  return cols;
}

// Column-wise softmax with max subtraction.
template <typename Derived>
auto softmax_columns(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> shifted = logits.rowwise() - logits.colwise().maxCoeff();
  MatrixX<Scalar> e = shifted.array().exp().matrix();
  return MatrixX<Scalar>(e.array().rowwise() / e.colwise().sum().array());
}

// Activations recorded by a forward pass. `acts[i]` is the output of layer i
// in NetworkGraph::layers() order (head's last entry holds logits).
template <typename Scalar>
struct Tape {
  std::vector<MatrixX<Scalar>> branch_inputs;
  std::vector<std::vector<MatrixX<Scalar>>> branch_acts;
  MatrixX<Scalar> concat;
  std::vector<MatrixX<Scalar>> head_acts;
};

template <typename Scalar>
void apply_layer(const DenseLayer<Scalar>& layer, const MatrixX<Scalar>& in, MatrixX<Scalar>& out) {
  out.noalias() = layer.weights * in;
  out.colwise() += layer.biases;
  if (layer.activation == Activation::ReLU) out = out.cwiseMax(Scalar(0));
}

template <typename Scalar>
Tape<Scalar> run_forward(const NetworkGraph<Scalar>& net, const Inputs<Scalar>& inputs) {
  const Eigen::Index n = batch_size(net, inputs);
  Tape<Scalar> tape;
  tape.concat.resize(net.spec.concat_width(), n);
  Eigen::Index row = 0;
  for (const auto& branch : net.branches) {
    const MatrixX<Scalar>& x = inputs.find(branch.input)->second;
    std::vector<MatrixX<Scalar>> acts(branch.layers.size());
    const MatrixX<Scalar>* in = &x;
    for (std::size_t l = 0; l < branch.layers.size(); ++l) {
      apply_layer(branch.layers[l], *in, acts[l]);
      in = &acts[l];
    }
    tape.concat.middleRows(row, in->rows()) = *in;
    row += in->rows();
    tape.branch_inputs.push_back(x);
    tape.branch_acts.push_back(std::move(acts));
  }
  for (const auto& p : net.spec.passthrough) {
    tape.concat.middleRows(row, p.width) = inputs.find(p.name)->second;
    row += p.width;
  }
  tape.head_acts.resize(net.head.size());
  const MatrixX<Scalar>* in = &tape.concat;
  for (std::size_t l = 0; l < net.head.size(); ++l) {
    apply_layer(net.head[l], *in, tape.head_acts[l]);
    in = &tape.head_acts[l];
  }
  return tape;
}

// Backpropagates `delta` (gradient w.r.t. the pre-activation of the last layer
// in `layers`) through the layer stack. Returns the gradient w.r.t. the stack's input.
template <typename Scalar>
MatrixX<Scalar> backward_stack(const std::vector<DenseLayer<Scalar>>& layers,
                               const MatrixX<Scalar>& stack_input,
                               const std::vector<MatrixX<Scalar>>& acts, MatrixX<Scalar> delta,
                               std::vector<DenseLayer<Scalar>>& grads) {
  for (std::size_t l = layers.size(); l-- > 0;) {
    const MatrixX<Scalar>& in = l == 0 ? stack_input : acts[l - 1];
    grads[l].weights.noalias() = delta * in.transpose();
    grads[l].biases = delta.rowwise().sum();
    MatrixX<Scalar> next = layers[l].weights.transpose() * delta;
    if (l > 0 && layers[l - 1].activation == Activation::ReLU)
      next = next.cwiseProduct((acts[l - 1].array() > Scalar(0)).matrix().template cast<Scalar>());
    delta = std::move(next);
  }
  return delta;
}

template <typename Scalar>
MatrixX<Scalar> one_hot(const std::vector<Label>& labels) {
  MatrixX<Scalar> y = MatrixX<Scalar>::Zero(kOutputWidth, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(class_index(labels[i]), static_cast<Eigen::Index>(i)) = 1;
  return y;
}

}  // namespace detail

/// Builds the graph for `spec` with He-style uniform weights, bound
/// sqrt(6 / fan_in), and zero biases. Layers are filled in layers() order,
/// each weight matrix row-major, so equal seeds give bit-identical parameters.
template <typename Scalar = double>
NetworkGraph<Scalar> init_network(const GraphSpec& spec, std::uint64_t seed) {
  auto net = detail::shape_network<Scalar>(spec);
  std::mt19937_64 rng(seed);
  for (auto* layer : net.layers()) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer->in_dim()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < layer->weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer->weights.cols(); ++c)
        layer->weights(r, c) = static_cast<Scalar>(dist(rng));
  }
  return net;
}

/// Class probabilities, 2 x batch; row 0 is p_malignant, row 1 p_normal.
template <typename Scalar>
MatrixX<Scalar> forward(const NetworkGraph<Scalar>& net, const Inputs<Scalar>& inputs) {
  auto tape = detail::run_forward(net, inputs);
  return detail::softmax_columns(tape.head_acts.back());
}

// Pre-softmax scores, 2 x batch.
template <typename Scalar>
MatrixX<Scalar> logits(const NetworkGraph<Scalar>& net, const Inputs<Scalar>& inputs) {
  return std::move(detail::run_forward(net, inputs).head_acts.back());
}

// Single example: each named input is one vector.
template <typename Scalar>
ProbabilityPair<Scalar> forward_one(const NetworkGraph<Scalar>& net,
                                    const std::map<std::string, VectorX<Scalar>, std::less<>>& inputs) {
  Inputs<Scalar> batch;
  for (const auto& [name, v] : inputs) batch.emplace(name, v);
  const MatrixX<Scalar> p = forward(net, batch);
  return {p(0, 0), p(1, 0)};
}

template <typename Scalar>
struct LossAndGradients {
  Scalar loss;
  Gradients<Scalar> gradients;
};

/// Mean categorical cross-entropy over the batch, -log p_true, computed with
/// log-sum-exp, plus its exact gradient with respect to every parameter.
template <typename Scalar>
LossAndGradients<Scalar> loss_and_gradients(const NetworkGraph<Scalar>& net, const Inputs<Scalar>& inputs,
                                            const std::vector<Label>& labels) {
  auto tape = detail::run_forward(net, inputs);
  const MatrixX<Scalar>& z = tape.head_acts.back();
  if (z.cols() != static_cast<Eigen::Index>(labels.size()))
    throw Error(Errc::ShapeMismatch, "label count does not match batch size");
  if (labels.empty()) throw Error(Errc::EmptyDataset, "no examples");
  const Scalar n = static_cast<Scalar>(labels.size());

  const auto zmax = z.colwise().maxCoeff();
  const auto lse = ((z.rowwise() - zmax).array().exp().colwise().sum().log() + zmax.array()).eval();
  Scalar loss = 0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) loss += lse(i) - z(class_index(labels[i]), i);
  loss /= n;

  Gradients<Scalar> grads = detail::shape_network<Scalar>(net.spec);
  MatrixX<Scalar> delta = (detail::softmax_columns(z) - detail::one_hot<Scalar>(labels)) / n;
  MatrixX<Scalar> d_concat = detail::backward_stack(net.head, tape.concat, tape.head_acts, std::move(delta), grads.head);

  Eigen::Index row = 0;
  for (std::size_t b = 0; b < net.branches.size(); ++b) {
    const auto& branch = net.branches[b];
    if (branch.layers.empty()) {
      row += net.spec.branches[b].input_width;
      continue;
    }
    const auto& acts = tape.branch_acts[b];
    const Eigen::Index width = branch.layers.back().out_dim();
    MatrixX<Scalar> d = d_concat.middleRows(row, width);
    if (branch.layers.back().activation == Activation::ReLU)
      d = d.cwiseProduct((acts.back().array() > Scalar(0)).matrix().template cast<Scalar>());
    detail::backward_stack(branch.layers, tape.branch_inputs[b], acts, std::move(d), grads.branches[b].layers);
    row += width;
  }
  return {loss, std::move(grads)};
}

template <typename Scalar>
struct TrainingSet {
  Inputs<Scalar> inputs;
  std::vector<Label> labels;
};

template <typename Scalar>
struct TrainResult {
  NetworkGraph<Scalar> network;
  std::vector<Scalar> loss_trace;  // loss before each epoch's update
};

/// Full-batch training for config.epochs updates. No early stopping and no
/// regularization; deterministic for a given starting network and data.
template <typename Scalar>
TrainResult<Scalar> train(NetworkGraph<Scalar> net, const TrainingSet<Scalar>& data, const TrainConfig& config) {
  config.validate();
  if (data.labels.empty()) throw Error(Errc::EmptyDataset, "training set is empty");

  Gradients<Scalar> m = detail::shape_network<Scalar>(net.spec);
  Gradients<Scalar> v = detail::shape_network<Scalar>(net.spec);
  auto params = net.layers();
  auto first = m.layers();
  auto second = v.layers();
  const Scalar lr = static_cast<Scalar>(config.learning_rate);
  const Scalar b1 = static_cast<Scalar>(config.adam_beta1);
  const Scalar b2 = static_cast<Scalar>(config.adam_beta2);
  const Scalar eps = static_cast<Scalar>(config.adam_epsilon);

  std::vector<Scalar> trace;
  trace.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto [loss, grads] = loss_and_gradients(net, data.inputs, data.labels);
    trace.push_back(loss);
    auto g = grads.layers();
    if (config.optimizer == Optimizer::SGD) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i]->weights -= lr * g[i]->weights;
        params[i]->biases -= lr * g[i]->biases;
      }
      continue;
    }
    const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(epoch));
    const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(epoch));
    auto adam = [&](auto& param, auto& mom1, auto& mom2, const auto& grad) {
      mom1 = b1 * mom1 + (Scalar(1) - b1) * grad;
      mom2 = b2 * mom2 + (Scalar(1) - b2) * grad.cwiseAbs2();
      param.array() -= lr * (mom1.array() / c1) / ((mom2.array() / c2).sqrt() + eps);
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
      adam(params[i]->weights, first[i]->weights, second[i]->weights, g[i]->weights);
      adam(params[i]->biases, first[i]->biases, second[i]->biases, g[i]->biases);
    }
  }
  return {std::move(net), std::move(trace)};
}

}  // namespace slideagg::nn
