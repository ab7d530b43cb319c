#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "slideagg/netcore.hpp"

namespace slideagg {

inline constexpr const char* kModelFormat = "slideagg-model";
inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  nn::NetworkGraph<double> network;
  nn::TrainConfig config;
};

// JSON document holding the topology, training config (including the seed)
// and every parameter, row-major. Doubles are written in shortest round-trip
// form so a reloaded network reproduces forward outputs bit for bit.
std::string serialize_model(const nn::NetworkGraph<double>& network, const nn::TrainConfig& config);
// Throws MalformedModel with a description of what failed to parse.
ModelFile parse_model(std::string_view text);

void save_model(const nn::NetworkGraph<double>& network, const nn::TrainConfig& config,
                const std::filesystem::path& path);
// Throws MissingFile or MalformedModel.
ModelFile load_model(const std::filesystem::path& path);

}  // namespace slideagg
