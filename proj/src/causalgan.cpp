#include "causalsynth/causalgan.hpp"

#include "causalsynth/checkpoint.hpp"
#include "causalsynth/loss.hpp"
#include "causalsynth/optimizer.hpp"
#include "causalsynth/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace causalsynth {

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian(0.0, 1.0);
    }
    return m;
}

std::vector<LayerSpec> mlp_architecture(std::size_t in, const std::vector<std::size_t>& hidden,
                                        std::size_t out, Activation hidden_act,
                                        Activation out_act) {
    std::vector<LayerSpec> arch;
    std::size_t prev = in;
    for (std::size_t h : hidden) {
        arch.push_back(DenseSpec{prev, h, hidden_act});
        prev = h;
    }
    arch.push_back(DenseSpec{prev, out, out_act});
    return arch;
}

Eigen::MatrixXd generator_objective_grad(const Eigen::MatrixXd& p, bool non_saturating) {
    const double n = static_cast<double>(p.size());
    Eigen::MatrixXd grad(p.rows(), p.cols());
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            const double v = std::min(1.0 - 1e-7, std::max(1e-7, p(r, c)));
            grad(r, c) = non_saturating ? -1.0 / (v * n) : -1.0 / ((1.0 - v) * n);
        }
    }
    return grad;
}

/// Ancestral pass in topological order. Each node's sub-generator consumes
/// its parents' freshly generated columns plus that node's own noise block.
/// Clamp values are in standardized units here.
Eigen::MatrixXd ancestral_forward(CausalGeneratorNet& net, const std::vector<Eigen::MatrixXd>& noise,
                                  const std::map<std::size_t, double>& clamp_std) {
    const Eigen::Index batch = noise.front().rows();
    const std::size_t k = net.graph.nodes.size();
    Eigen::MatrixXd values(batch, static_cast<Eigen::Index>(k));
    for (std::size_t node : net.topo_order) {
        const auto& parents = net.parents[node];
        Eigen::MatrixXd input(batch, static_cast<Eigen::Index>(parents.size() + net.noise_dim));
        for (std::size_t p = 0; p < parents.size(); ++p) {
            input.col(static_cast<Eigen::Index>(p)) =
                values.col(static_cast<Eigen::Index>(parents[p]));
        }
        input.rightCols(static_cast<Eigen::Index>(net.noise_dim)) = noise[node];
        const auto it = clamp_std.find(node);
        if (it != clamp_std.end()) {
            values.col(static_cast<Eigen::Index>(node)).setConstant(it->second);
        } else {
            values.col(static_cast<Eigen::Index>(node)) =
                net.sub_generators[node].forward(input).col(0);
        }
    }
    return values;
}

}  // namespace

CausalGeneratorNet build_causal_generator(const WeightedDag& graph, const CausalGanConfig& cfg) {
    const auto order = graph.topological_order();
    if (!order) throw std::runtime_error("build_causal_generator: graph has a cycle");

    CausalGeneratorNet net;
    net.graph = graph;
    net.topo_order = *order;
    net.noise_dim = cfg.noise_dim;
    const std::size_t k = graph.nodes.size();
    net.parents.resize(k);
    for (std::size_t v = 0; v < k; ++v) net.parents[v] = graph.parents_of(v);

    for (std::size_t v = 0; v < k; ++v) {
        net.sub_generators.emplace_back(
            mlp_architecture(net.parents[v].size() + cfg.noise_dim, cfg.sub_hidden, 1,
                             Activation::Relu, Activation::Identity),
            derive_seed(cfg.seed, 100 + v));
    }
    net.scaler.mean = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(k));
    net.scaler.sd = Eigen::RowVectorXd::Ones(static_cast<Eigen::Index>(k));
    return net;
}

TrainedCausalGan train_causal_gan(const PanelDataset& data, const WeightedDag& graph,
                                  const CausalGanConfig& cfg) {
    data.validate();
    {
        std::vector<std::string> a = data.columns, b = graph.nodes;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) throw std::runtime_error("train_causal_gan: graph nodes != data columns");
    }
    if (data.rows() < 2 * cfg.batch_size) {
        throw std::runtime_error("train_causal_gan: need at least two batches of rows");
    }

    TrainedCausalGan out;
    out.generator = build_causal_generator(graph, cfg);
    const std::size_t k = graph.nodes.size();

    // Reorder the data columns to the graph's node order before scaling.
    Eigen::MatrixXd values(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(k));
    for (std::size_t v = 0; v < k; ++v) {
        values.col(static_cast<Eigen::Index>(v)) = data.column(graph.nodes[v]);
    }
    out.generator.scaler = Scaler::fit(values);
    const Eigen::MatrixXd standardized = out.generator.scaler.transform(values);

    out.discriminator = Network(
        mlp_architecture(k, cfg.discriminator_hidden, 1, Activation::Relu, Activation::Sigmoid),
        derive_seed(cfg.seed, 2));

    OptimizerState g_opt, d_opt;
    g_opt.learning_rate = d_opt.learning_rate = cfg.learning_rate;
    g_opt.beta1 = d_opt.beta1 = cfg.adam_beta1;
    g_opt.beta2 = d_opt.beta2 = cfg.adam_beta2;

    std::vector<Eigen::MatrixXd*> g_params;
    for (auto& sub : out.generator.sub_generators) {
        for (auto* p : sub.params()) g_params.push_back(p);
    }

    Rng rng(derive_seed(cfg.seed, 3));
    const auto n = static_cast<std::size_t>(standardized.rows());
    std::vector<std::size_t> row_order(n);
    for (std::size_t i = 0; i < n; ++i) row_order[i] = i;
    const std::size_t batches_per_epoch = n / cfg.batch_size;
    const auto batch = static_cast<Eigen::Index>(cfg.batch_size);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(batch, 1);
    const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(batch, 1);

    const auto draw_noise = [&]() {
        std::vector<Eigen::MatrixXd> noise;
        noise.reserve(k);
        for (std::size_t v = 0; v < k; ++v) {
            noise.push_back(gaussian_matrix(batch, static_cast<Eigen::Index>(cfg.noise_dim), rng));
        }
        return noise;
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i) std::swap(row_order[i], row_order[rng.index(i + 1)]);
        double d_loss_sum = 0.0, g_loss_sum = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            Eigen::MatrixXd real(batch, static_cast<Eigen::Index>(k));
            for (Eigen::Index i = 0; i < batch; ++i) {
                real.row(i) = standardized.row(static_cast<Eigen::Index>(
                    row_order[b * cfg.batch_size + static_cast<std::size_t>(i)]));
            }

            // Discriminator step.
            const Eigen::MatrixXd fake_d = ancestral_forward(out.generator, draw_noise(), {});
            const LossValue real_loss = bce_loss(out.discriminator.forward(real), ones);
            const Gradients d_real = out.discriminator.backward(real_loss.grad);
            const LossValue fake_loss = bce_loss(out.discriminator.forward(fake_d), zeros);
            const Gradients d_fake = out.discriminator.backward(fake_loss.grad);
            std::vector<Eigen::MatrixXd> d_grads;
            for (std::size_t i = 0; i < d_real.by_param.size(); ++i) {
                d_grads.push_back(0.5 * (d_real.by_param[i] + d_fake.by_param[i]));
            }
            optimizer_step(d_opt, out.discriminator.params(), d_grads);

            // Generator step: every sub-generator updated jointly. The
            // gradient reaching node v is its own output-column slice plus
            // whatever its children propagate back through their inputs.
            const Eigen::MatrixXd fake_g = ancestral_forward(out.generator, draw_noise(), {});
            const Eigen::MatrixXd p = out.discriminator.forward(fake_g);
            const Eigen::MatrixXd dp = generator_objective_grad(p, cfg.non_saturating);
            const Gradients through_d = out.discriminator.backward(dp);

            std::vector<Eigen::VectorXd> col_grad(k);
            for (std::size_t v = 0; v < k; ++v) {
                col_grad[v] = through_d.wrt_input[0].col(static_cast<Eigen::Index>(v));
            }
            std::vector<std::vector<Eigen::MatrixXd>> sub_grads(k);
            for (auto it = out.generator.topo_order.rbegin(); it != out.generator.topo_order.rend();
                 ++it) {
                const std::size_t v = *it;
                const Gradients g =
                    out.generator.sub_generators[v].backward(col_grad[v]);
                sub_grads[v] = g.by_param;
                const auto& parents = out.generator.parents[v];
                for (std::size_t pi = 0; pi < parents.size(); ++pi) {
                    col_grad[parents[pi]] += g.wrt_input[0].col(static_cast<Eigen::Index>(pi));
                }
            }
            std::vector<Eigen::MatrixXd> g_grads;
            for (std::size_t v = 0; v < k; ++v) {
                for (auto& gm : sub_grads[v]) g_grads.push_back(std::move(gm));
            }
            optimizer_step(g_opt, g_params, g_grads);

            double g_loss = 0.0;
            for (Eigen::Index r = 0; r < p.rows(); ++r) {
                const double v = std::min(1.0 - 1e-7, std::max(1e-7, p(r, 0)));
                g_loss += cfg.non_saturating ? -std::log(v) : std::log(1.0 - v);
            }
            g_loss /= static_cast<double>(p.rows());
            const double d_loss = 0.5 * (real_loss.value + fake_loss.value);
            if (!std::isfinite(d_loss) || !std::isfinite(g_loss)) {
                throw std::runtime_error("train_causal_gan: diverged at epoch " +
                                         std::to_string(epoch));
            }
            d_loss_sum += d_loss;
            g_loss_sum += g_loss;
        }
        out.log.push_back({epoch, d_loss_sum / static_cast<double>(batches_per_epoch),
                           g_loss_sum / static_cast<double>(batches_per_epoch)});
    }
    return out;
}

PanelDataset sample_causal(const CausalGeneratorNet& net, std::size_t n, std::uint64_t seed,
                           const std::map<std::string, double>& clamp) {
    if (n < 1) throw std::runtime_error("sample_causal: n must be >= 1");
    CausalGeneratorNet local = net;  // forward() caches; work on a copy
    const std::size_t k = net.graph.nodes.size();

    std::map<std::size_t, double> clamp_std;
    for (const auto& [name, value] : clamp) {
        const std::size_t node = net.graph.node_index(name);
        clamp_std[node] = (value - net.scaler.mean(static_cast<Eigen::Index>(node))) /
                          net.scaler.sd(static_cast<Eigen::Index>(node));
    }

    Rng rng(seed);
    PanelDataset out;
    out.columns = net.graph.nodes;
    out.time_indexed = false;
    out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));

    const std::size_t chunk = 4096;
    std::size_t done = 0;
    while (done < n) {
        const auto take = static_cast<Eigen::Index>(std::min(chunk, n - done));
        std::vector<Eigen::MatrixXd> noise;
        noise.reserve(k);
        for (std::size_t v = 0; v < k; ++v) {
            noise.push_back(gaussian_matrix(take, static_cast<Eigen::Index>(net.noise_dim), rng));
        }
        out.values.middleRows(static_cast<Eigen::Index>(done), take) =
            net.scaler.inverse(ancestral_forward(local, noise, clamp_std));
        done += static_cast<std::size_t>(take);
    }
    return out;
}

void save_causal_gan(const TrainedCausalGan& gan, const std::string& path) {
    nlohmann::json j;
    j["format"] = "causalsynth-causalgan";
    j["graph"] = nlohmann::json::parse(dag_to_json(gan.generator.graph));
    j["noise_dim"] = gan.generator.noise_dim;
    j["scaler_mean"] = std::vector<double>(
        gan.generator.scaler.mean.data(),
        gan.generator.scaler.mean.data() + gan.generator.scaler.mean.size());
    j["scaler_sd"] = std::vector<double>(
        gan.generator.scaler.sd.data(),
        gan.generator.scaler.sd.data() + gan.generator.scaler.sd.size());
    j["sub_generators"] = nlohmann::json::array();
    for (const auto& sub : gan.generator.sub_generators) {
        j["sub_generators"].push_back(nlohmann::json::parse(network_to_json(sub, 0)));
    }
    j["discriminator"] = nlohmann::json::parse(network_to_json(gan.discriminator, 0));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump() << '\n';
}

TrainedCausalGan load_causal_gan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "causalsynth-causalgan") {
        throw std::runtime_error("load_causal_gan: unrecognized format");
    }
    TrainedCausalGan gan;
    gan.generator.graph = dag_from_json(j.at("graph").dump());
    gan.generator.noise_dim = j.at("noise_dim").get<std::size_t>();
    const auto order = gan.generator.graph.topological_order();
    if (!order) throw std::runtime_error("load_causal_gan: cyclic graph");
    gan.generator.topo_order = *order;
    const std::size_t k = gan.generator.graph.nodes.size();
    gan.generator.parents.resize(k);
    for (std::size_t v = 0; v < k; ++v) gan.generator.parents[v] = gan.generator.graph.parents_of(v);
    const auto mean = j.at("scaler_mean").get<std::vector<double>>();
    const auto sd = j.at("scaler_sd").get<std::vector<double>>();
    gan.generator.scaler.mean = Eigen::Map<const Eigen::RowVectorXd>(
        mean.data(), static_cast<Eigen::Index>(mean.size()));
    gan.generator.scaler.sd =
        Eigen::Map<const Eigen::RowVectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    for (const auto& sub : j.at("sub_generators")) {
        gan.generator.sub_generators.push_back(network_from_json(sub.dump()).net);
    }
    gan.discriminator = network_from_json(j.at("discriminator").dump()).net;
    return gan;
}

}  // namespace causalsynth
