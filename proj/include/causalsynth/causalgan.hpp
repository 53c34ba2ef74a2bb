#pragma once

#include "causalsynth/gan.hpp"
#include "causalsynth/graph.hpp"
#include "causalsynth/net.hpp"
#include "causalsynth/panel.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace causalsynth {

struct CausalGanConfig {
    std::size_t noise_dim = 4;  // per node
    std::vector<std::size_t> sub_hidden = {32, 32};
    std::vector<std::size_t> discriminator_hidden = {64, 64};
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    double learning_rate = 2e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    bool non_saturating = false;
    std::uint64_t seed = 1;
};

/// One sub-generator per variable, wired along the supplied causal graph.
/// Node v's value is a function of (sampled parents of v, Z_v) only; edge
/// weights in the graph are ignored, only the structure constrains sampling.
struct CausalGeneratorNet {
    WeightedDag graph;
    std::vector<Network> sub_generators;     // indexed like graph.nodes
    std::vector<std::vector<std::size_t>> parents;  // indexed like graph.nodes
    std::vector<std::size_t> topo_order;
    Scaler scaler;
    std::size_t noise_dim = 0;

    std::size_t sub_input_arity(std::size_t node) const {
        return parents[node].size() + noise_dim;
    }
};

/// Untrained generator network for the graph; roots take only noise.
/// Rejects cyclic graphs.
CausalGeneratorNet build_causal_generator(const WeightedDag& graph, const CausalGanConfig& cfg);

struct TrainedCausalGan {
    CausalGeneratorNet generator;
    Network discriminator;
    std::vector<EpochLog> log;
};

/// Trains every sub-generator jointly against one discriminator over full
/// rows. The data is treated cross-sectionally; any time ordering is ignored.
TrainedCausalGan train_causal_gan(const PanelDataset& data, const WeightedDag& graph,
                                  const CausalGanConfig& cfg);

/// Ancestral sampling through the sub-generators; time_indexed = false.
/// `clamp` pins chosen nodes to fixed values (in data units) before their
/// descendants sample; this is the interventional test hook.
PanelDataset sample_causal(const CausalGeneratorNet& net, std::size_t n, std::uint64_t seed,
                           const std::map<std::string, double>& clamp = {});

void save_causal_gan(const TrainedCausalGan& gan, const std::string& path);
TrainedCausalGan load_causal_gan(const std::string& path);

}  // namespace causalsynth
