#pragma once

#include <cstdint>
#include <string_view>

namespace slideagg {

// Stable per-consumer seed: splitmix64(master ^ fnv1a64(tag)).
// Every random consumer derives its own stream from the single master seed,
// so results do not depend on scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace slideagg
