#include "causalsynth/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace causalsynth {

std::string network_to_json(const Network& net, std::uint64_t seed) {
    nlohmann::json arch = nlohmann::json::array();
    for (const auto& spec : net.architecture()) {
        if (std::holds_alternative<DenseSpec>(spec)) {
            const auto& d = std::get<DenseSpec>(spec);
            arch.push_back({{"type", "dense"},
                            {"in", d.in},
                            {"out", d.out},
                            {"activation", activation_name(d.act)}});
        } else {
            const auto& g = std::get<GruSpec>(spec);
            arch.push_back({{"type", "gru"}, {"in", g.in}, {"hidden", g.hidden}});
        }
    }

    nlohmann::json weights = nlohmann::json::array();
    for (const auto& t : net.weights()) {
        weights.push_back({{"shape", t.shape}, {"data", t.data}});
    }

    nlohmann::json j;
    j["format"] = "causalsynth-checkpoint";
    j["schema_version"] = 1;
    j["seed"] = seed;
    j["architecture"] = arch;
    j["weights"] = weights;
    return j.dump();
}

LoadedNetwork network_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "causalsynth-checkpoint") {
        throw std::runtime_error("checkpoint: unrecognized format");
    }

    std::vector<LayerSpec> arch;
    for (const auto& layer : j.at("architecture")) {
        const std::string type = layer.at("type").get<std::string>();
        if (type == "dense") {
            arch.push_back(DenseSpec{layer.at("in").get<std::size_t>(),
                                     layer.at("out").get<std::size_t>(),
                                     activation_from_name(layer.at("activation").get<std::string>())});
        } else if (type == "gru") {
            arch.push_back(GruSpec{layer.at("in").get<std::size_t>(),
                                   layer.at("hidden").get<std::size_t>()});
        } else {
            throw std::runtime_error("checkpoint: unknown layer type '" + type + "'");
        }
    }

    LoadedNetwork out{Network(arch, 0), j.at("seed").get<std::uint64_t>()};
    std::vector<Tensor> weights;
    for (const auto& w : j.at("weights")) {
        Tensor t;
        t.shape = w.at("shape").get<std::vector<std::size_t>>();
        t.data = w.at("data").get<std::vector<double>>();
        weights.push_back(std::move(t));
    }
    out.net.set_weights(weights);
    return out;
}

void save_network(const Network& net, std::uint64_t seed, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << network_to_json(net, seed) << '\n';
}

LoadedNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return network_from_json(text);
}

}  // namespace causalsynth
