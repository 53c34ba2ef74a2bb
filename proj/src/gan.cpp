#include "causalsynth/gan.hpp"

#include "causalsynth/checkpoint.hpp"
#include "causalsynth/loss.hpp"
#include "causalsynth/optimizer.hpp"
#include "causalsynth/rng.hpp"

#include <json.hpp>

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

/// Gradient of the generator objective with respect to D's output p.
/// Literal minimax: descend mean log(1 - p). Non-saturating: descend
/// -mean log(p).
Eigen::MatrixXd generator_objective_grad(const Eigen::MatrixXd& p, bool non_saturating,
                                         double* value) {
    const double n = static_cast<double>(p.size());
    Eigen::MatrixXd grad(p.rows(), p.cols());
    double total = 0.0;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            const double v = std::min(1.0 - 1e-7, std::max(1e-7, p(r, c)));
            if (non_saturating) {
                total += -std::log(v);
                grad(r, c) = -1.0 / (v * n);
            } else {
                total += std::log(1.0 - v);
                grad(r, c) = -1.0 / ((1.0 - v) * n);
            }
        }
    }
    if (value) *value = total / n;
    return grad;
}

}  // namespace

Scaler Scaler::fit(const Eigen::MatrixXd& values) {
    Scaler s;
    s.mean = values.colwise().mean();
    Eigen::MatrixXd centered = values;
    centered.rowwise() -= s.mean;
    s.sd = (centered.array().square().colwise().sum() / static_cast<double>(values.rows() - 1))
               .sqrt();
    for (Eigen::Index c = 0; c < s.sd.cols(); ++c) {
        if (s.sd(c) < 1e-12) s.sd(c) = 1.0;  // constant column
    }
    return s;
}

Eigen::MatrixXd Scaler::transform(const Eigen::MatrixXd& values) const {
    Eigen::MatrixXd out = values;
    out.rowwise() -= mean;
    out.array().rowwise() /= sd.array();
    return out;
}

Eigen::MatrixXd Scaler::inverse(const Eigen::MatrixXd& values) const {
    Eigen::MatrixXd out = values;
    out.array().rowwise() *= sd.array();
    out.rowwise() += mean;
    return out;
}

TrainedGan train_gan(const PanelDataset& data, const GanConfig& cfg) {
    data.validate();
    if (data.rows() < 2 * cfg.batch_size) {
        throw std::runtime_error("train_gan: need at least two batches of rows");
    }
    const std::size_t k = data.cols();

    TrainedGan gan;
    gan.columns = data.columns;
    gan.latent_dim = cfg.latent_dim;
    gan.scaler = Scaler::fit(data.values);
    const Eigen::MatrixXd standardized = gan.scaler.transform(data.values);

    gan.generator = Network(
        mlp_architecture(cfg.latent_dim, cfg.generator_hidden, k, Activation::Relu,
                         Activation::Identity),
        derive_seed(cfg.seed, 1));
    gan.discriminator = Network(
        mlp_architecture(k, cfg.discriminator_hidden, 1, Activation::Relu, Activation::Sigmoid),
        derive_seed(cfg.seed, 2));

    OptimizerState g_opt, d_opt;
    g_opt.learning_rate = d_opt.learning_rate = cfg.learning_rate;
    g_opt.beta1 = d_opt.beta1 = cfg.adam_beta1;
    g_opt.beta2 = d_opt.beta2 = cfg.adam_beta2;

    Rng rng(derive_seed(cfg.seed, 3));
    const auto n = static_cast<std::size_t>(standardized.rows());
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const std::size_t batches_per_epoch = n / cfg.batch_size;
    const auto batch = static_cast<Eigen::Index>(cfg.batch_size);

    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(batch, 1);
    const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(batch, 1);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates reshuffle of the real rows.
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(order[i], order[rng.index(i + 1)]);
        }
        double d_loss_sum = 0.0, g_loss_sum = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            Eigen::MatrixXd real(batch, static_cast<Eigen::Index>(k));
            for (Eigen::Index i = 0; i < batch; ++i) {
                real.row(i) = standardized.row(
                    static_cast<Eigen::Index>(order[b * cfg.batch_size + static_cast<std::size_t>(i)]));
            }

            // Discriminator step on a real and a fake batch.
            const Eigen::MatrixXd z_d =
                gaussian_matrix(batch, static_cast<Eigen::Index>(cfg.latent_dim), rng);
            const Eigen::MatrixXd fake_d = gan.generator.forward(z_d);
            const LossValue real_loss = bce_loss(gan.discriminator.forward(real), ones);
            const Gradients d_real_grads = gan.discriminator.backward(real_loss.grad);
            const LossValue fake_loss = bce_loss(gan.discriminator.forward(fake_d), zeros);
            const Gradients d_fake_grads = gan.discriminator.backward(fake_loss.grad);
            std::vector<Eigen::MatrixXd> d_grads;
            for (std::size_t i = 0; i < d_real_grads.by_param.size(); ++i) {
                d_grads.push_back(0.5 * (d_real_grads.by_param[i] + d_fake_grads.by_param[i]));
            }
            optimizer_step(d_opt, gan.discriminator.params(), d_grads);
            const double d_loss = 0.5 * (real_loss.value + fake_loss.value);

            // Generator step through the frozen discriminator. The generator
            // only ever receives z and the discriminator's input gradient.
            const Eigen::MatrixXd z_g =
                gaussian_matrix(batch, static_cast<Eigen::Index>(cfg.latent_dim), rng);
            const Eigen::MatrixXd fake_g = gan.generator.forward(z_g);
            const Eigen::MatrixXd p = gan.discriminator.forward(fake_g);
            double g_loss = 0.0;
            const Eigen::MatrixXd dp = generator_objective_grad(p, cfg.non_saturating, &g_loss);
            const Gradients through_d = gan.discriminator.backward(dp);
            const Gradients g_grads = gan.generator.backward_seq(through_d.wrt_input);
            optimizer_step(g_opt, gan.generator.params(), g_grads.by_param);

            d_loss_sum += d_loss;
            g_loss_sum += g_loss;
            if (!std::isfinite(d_loss) || !std::isfinite(g_loss)) {
                throw std::runtime_error("train_gan: diverged at epoch " + std::to_string(epoch) +
                                         " (d_loss=" + std::to_string(d_loss) +
                                         ", g_loss=" + std::to_string(g_loss) + ")");
            }
        }
        gan.log.push_back({epoch, d_loss_sum / static_cast<double>(batches_per_epoch),
                           g_loss_sum / static_cast<double>(batches_per_epoch)});
    }
    return gan;
}

PanelDataset sample_gan(const TrainedGan& gan, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::runtime_error("sample_gan: n must be >= 1");
    Rng rng(seed);
    Network generator = gan.generator;  // forward() caches; work on a copy
    PanelDataset out;
    out.columns = gan.columns;
    out.time_indexed = false;
    out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(gan.columns.size()));

    const std::size_t chunk = 4096;
    std::size_t done = 0;
    while (done < n) {
        const auto take = static_cast<Eigen::Index>(std::min(chunk, n - done));
        const Eigen::MatrixXd z =
            gaussian_matrix(take, static_cast<Eigen::Index>(gan.latent_dim), rng);
        out.values.middleRows(static_cast<Eigen::Index>(done), take) =
            gan.scaler.inverse(generator.forward(z));
        done += static_cast<std::size_t>(take);
    }
    return out;
}

Eigen::VectorXd discriminator_score(const TrainedGan& gan, const PanelDataset& rows) {
    if (rows.columns != gan.columns) {
        throw std::runtime_error("discriminator_score: column schema mismatch");
    }
    Network discriminator = gan.discriminator;
    return discriminator.forward(gan.scaler.transform(rows.values)).col(0);
}

std::string training_log_to_json(const std::vector<EpochLog>& log) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : log) {
        j.push_back({{"epoch", e.epoch}, {"d_loss", e.d_loss}, {"g_loss", e.g_loss}});
    }
    return j.dump(2);
}

void save_gan(const TrainedGan& gan, const std::string& path) {
    nlohmann::json j;
    j["format"] = "causalsynth-gan";
    j["columns"] = gan.columns;
    j["latent_dim"] = gan.latent_dim;
    j["scaler_mean"] = std::vector<double>(gan.scaler.mean.data(),
                                           gan.scaler.mean.data() + gan.scaler.mean.size());
    j["scaler_sd"] =
        std::vector<double>(gan.scaler.sd.data(), gan.scaler.sd.data() + gan.scaler.sd.size());
    j["generator"] = nlohmann::json::parse(network_to_json(gan.generator, 0));
    j["discriminator"] = nlohmann::json::parse(network_to_json(gan.discriminator, 0));
    j["log"] = nlohmann::json::parse(training_log_to_json(gan.log));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump() << '\n';
}

TrainedGan load_gan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "causalsynth-gan") {
        throw std::runtime_error("load_gan: unrecognized format");
    }
    TrainedGan gan;
    gan.columns = j.at("columns").get<std::vector<std::string>>();
    gan.latent_dim = j.at("latent_dim").get<std::size_t>();
    const auto mean = j.at("scaler_mean").get<std::vector<double>>();
    const auto sd = j.at("scaler_sd").get<std::vector<double>>();
    gan.scaler.mean = Eigen::Map<const Eigen::RowVectorXd>(mean.data(),
                                                           static_cast<Eigen::Index>(mean.size()));
    gan.scaler.sd =
        Eigen::Map<const Eigen::RowVectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    gan.generator = network_from_json(j.at("generator").dump()).net;
    gan.discriminator = network_from_json(j.at("discriminator").dump()).net;
    for (const auto& e : j.at("log")) {
        gan.log.push_back({e.at("epoch").get<std::size_t>(), e.at("d_loss").get<double>(),
                           e.at("g_loss").get<double>()});
    }
    return gan;
}

}  // namespace causalsynth
