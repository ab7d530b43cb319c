#include "slideagg/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slideagg/csv.hpp"

namespace slideagg {

using nlohmann::json;

namespace {

json layer_to_json(const nn::DenseLayer<double>& layer) {
  json weights = json::array();
  for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) weights.push_back(layer.weights(r, c));
  json biases = json::array();
  for (Eigen::Index i = 0; i < layer.biases.size(); ++i) biases.push_back(layer.biases(i));
  return {{"activation", nn::to_string(layer.activation)},
          {"out", layer.out_dim()},
          {"in", layer.in_dim()},
          {"weights", std::move(weights)},
          {"biases", std::move(biases)}};
}

void layer_from_json(const json& j, nn::DenseLayer<double>& layer, const std::string& where) {
  const auto out = j.at("out").get<Eigen::Index>();
  const auto in = j.at("in").get<Eigen::Index>();
  if (out != layer.out_dim() || in != layer.in_dim())
    throw Error(Errc::MalformedModel, where + ": layer shape does not match topology");
  if (nn::parse_activation(j.at("activation").get<std::string>()) != layer.activation)
    throw Error(Errc::MalformedModel, where + ": activation does not match topology");
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (w.size() != static_cast<std::size_t>(out * in) || b.size() != static_cast<std::size_t>(out))
    throw Error(Errc::MalformedModel, where + ": wrong parameter count");
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < out; ++r)
    for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = w[k++].get<double>();
  for (Eigen::Index i = 0; i < out; ++i) layer.biases(i) = b[i].get<double>();
}

}  // namespace

std::string serialize_model(const nn::NetworkGraph<double>& network, const nn::TrainConfig& config) {
  const auto& spec = network.spec;
  json branches = json::array();
  for (const auto& b : spec.branches)
    branches.push_back({{"name", b.name}, {"input_width", b.input_width}, {"hidden", b.hidden}});
  json passthrough = json::array();
  for (const auto& p : spec.passthrough) passthrough.push_back({{"name", p.name}, {"width", p.width}});

  json branch_layers = json::array();
  for (const auto& b : network.branches) {
    json layers = json::array();
    for (const auto& l : b.layers) layers.push_back(layer_to_json(l));
    branch_layers.push_back({{"input", b.input}, {"layers", std::move(layers)}});
  }
  json head = json::array();
  for (const auto& l : network.head) head.push_back(layer_to_json(l));

  json doc = {
      {"format", kModelFormat},
      {"version", kModelFormatVersion},
      {"topology", spec.topology},
      {"graph", {{"branches", branches}, {"passthrough", passthrough}, {"head_hidden", spec.head_hidden}}},
      {"config",
       {{"epochs", config.epochs},
        {"learning_rate", config.learning_rate},
        {"seed", config.seed},
        {"optimizer", nn::to_string(config.optimizer)},
        {"adam_beta1", config.adam_beta1},
        {"adam_beta2", config.adam_beta2},
        {"adam_epsilon", config.adam_epsilon}}},
      {"parameters", {{"branches", std::move(branch_layers)}, {"head", std::move(head)}}},
  };
  return doc.dump() + "\n";
}

ModelFile parse_model(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kModelFormat)
      throw Error(Errc::MalformedModel, "not a " + std::string(kModelFormat) + " document");
    if (const int v = doc.at("version").get<int>(); v != kModelFormatVersion)
      throw Error(Errc::MalformedModel, "unsupported version " + std::to_string(v));

    nn::GraphSpec spec;
    spec.topology = doc.at("topology").get<std::string>();
    const auto& graph = doc.at("graph");
    for (const auto& b : graph.at("branches"))
      spec.branches.push_back({b.at("name").get<std::string>(), b.at("input_width").get<int>(),
                               b.at("hidden").get<std::vector<int>>()});
    for (const auto& p : graph.at("passthrough"))
      spec.passthrough.push_back({p.at("name").get<std::string>(), p.at("width").get<int>()});
    spec.head_hidden = graph.at("head_hidden").get<std::vector<int>>();

    ModelFile model;
    const auto& cfg = doc.at("config");
    model.config.epochs = cfg.at("epochs").get<int>();
    model.config.learning_rate = cfg.at("learning_rate").get<double>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.config.optimizer = nn::parse_optimizer(cfg.at("optimizer").get<std::string>());
    model.config.adam_beta1 = cfg.at("adam_beta1").get<double>();
    model.config.adam_beta2 = cfg.at("adam_beta2").get<double>();
    model.config.adam_epsilon = cfg.at("adam_epsilon").get<double>();

    try {
      model.network = nn::detail::shape_network<double>(spec);
    } catch (const Error& e) {
      throw Error(Errc::MalformedModel, e.what());
    }
    const auto& params = doc.at("parameters");
    const auto& branches = params.at("branches");
    if (branches.size() != model.network.branches.size())
      throw Error(Errc::MalformedModel, "branch count does not match topology");
    for (std::size_t b = 0; b < branches.size(); ++b) {
      auto& branch = model.network.branches[b];
      const auto& layers = branches[b].at("layers");
      if (branches[b].at("input").get<std::string>() != branch.input || layers.size() != branch.layers.size())
        throw Error(Errc::MalformedModel, "branch " + std::to_string(b) + " does not match topology");
      for (std::size_t l = 0; l < layers.size(); ++l)
        layer_from_json(layers[l], branch.layers[l], "branch '" + branch.input + "' layer " + std::to_string(l));
    }
    const auto& head = params.at("head");
    if (head.size() != model.network.head.size())
      throw Error(Errc::MalformedModel, "head depth does not match topology");
    for (std::size_t l = 0; l < head.size(); ++l)
      layer_from_json(head[l], model.network.head[l], "head layer " + std::to_string(l));
    return model;
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedModel) throw;
    throw Error(Errc::MalformedModel, e.what());
  }
}

void save_model(const nn::NetworkGraph<double>& network, const nn::TrainConfig& config,
                const std::filesystem::path& path) {
  auto out = csv::open_for_write(path);
  out << serialize_model(network, config);
  if (!out) throw Error(Errc::WriteFailed, path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in || !std::filesystem::is_regular_file(path)) throw Error(Errc::MissingFile, path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_model(text.str());
  } catch (const Error& e) {
    throw Error(Errc::MalformedModel, path.string() + ": " + e.what());
  }
}

}  // namespace slideagg
