#pragma once

#include "causalsynth/net.hpp"

#include <cstdint>
#include <string>

namespace causalsynth {

/// Self-describing network checkpoint: architecture descriptor, init seed and
/// flat weight arrays in one JSON document. Doubles are serialized with the
/// shortest round-tripping representation, so load(save(net)) is bit-exact.
void save_network(const Network& net, std::uint64_t seed, const std::string& path);

struct LoadedNetwork {
    Network net;
    std::uint64_t seed = 0;
};
LoadedNetwork load_network(const std::string& path);

std::string network_to_json(const Network& net, std::uint64_t seed);
LoadedNetwork network_from_json(const std::string& text);

}  // namespace causalsynth
