#include "causalsynth/timegan.hpp"

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

Seq gaussian_seq(std::size_t steps, Eigen::Index batch, Eigen::Index dim, Rng& rng) {
    Seq s;
    s.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        Eigen::MatrixXd m(batch, dim);
        for (Eigen::Index r = 0; r < batch; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = rng.gaussian(0.0, 1.0);
        }
        s.push_back(std::move(m));
    }
    return s;
}

Seq add_seqs(const Seq& a, const Seq& b, double b_scale = 1.0) {
    if (a.size() != b.size()) throw std::runtime_error("timegan: sequence length mismatch");
    Seq out;
    out.reserve(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) out.push_back(a[t] + b_scale * b[t]);
    return out;
}

std::vector<Eigen::MatrixXd> add_grads(const std::vector<Eigen::MatrixXd>& a,
                                       const std::vector<Eigen::MatrixXd>& b, double b_scale) {
    if (a.size() != b.size()) throw std::runtime_error("timegan: gradient count mismatch");
    std::vector<Eigen::MatrixXd> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] + b_scale * b[i]);
    return out;
}

std::vector<Eigen::MatrixXd*> concat_params(Network& a, Network& b) {
    std::vector<Eigen::MatrixXd*> out = a.params();
    for (auto* p : b.params()) out.push_back(p);
    return out;
}

/// One-step-ahead supervised objective: supervisor output at step t predicts
/// the real latent at step t+1. Mean squared L2 over (batch, step).
struct SupervisedEval {
    double loss = 0.0;
    Seq grad_wrt_outputs;  // aligned with the supervisor output sequence
    Seq grad_wrt_inputs;   // direct target-side gradient, aligned with h
};

SupervisedEval supervised_eval(const Seq& h, const Seq& s_hat) {
    if (h.size() != s_hat.size() || h.size() < 2) {
        throw std::runtime_error("timegan: supervised loss needs >= 2 steps");
    }
    const std::size_t steps = h.size();
    const double count =
        static_cast<double>(steps - 1) * static_cast<double>(h.front().rows());

    SupervisedEval out;
    out.grad_wrt_outputs.assign(steps, Eigen::MatrixXd());
    out.grad_wrt_inputs.assign(steps, Eigen::MatrixXd());
    for (std::size_t t = 0; t < steps; ++t) {
        out.grad_wrt_outputs[t] = Eigen::MatrixXd::Zero(h[t].rows(), h[t].cols());
        out.grad_wrt_inputs[t] = Eigen::MatrixXd::Zero(h[t].rows(), h[t].cols());
    }
    for (std::size_t t = 0; t + 1 < steps; ++t) {
        const Eigen::MatrixXd diff = h[t + 1] - s_hat[t];
        out.loss += diff.squaredNorm();
        out.grad_wrt_outputs[t] = -2.0 * diff / count;
        out.grad_wrt_inputs[t + 1] = 2.0 * diff / count;
    }
    out.loss /= count;
    return out;
}

std::vector<std::size_t> window_starts_for(std::size_t rows, std::size_t seq_len,
                                           std::size_t stride) {
    if (seq_len < 2) throw std::runtime_error("timegan: sequence length must be >= 2");
    if (stride < 1) throw std::runtime_error("timegan: stride must be >= 1");
    if (rows < seq_len) throw std::runtime_error("timegan: dataset shorter than one window");
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + seq_len <= rows; s += stride) starts.push_back(s);
    return starts;
}

Seq gather_windows(const Eigen::MatrixXd& values, const std::vector<std::size_t>& starts,
                   std::size_t seq_len) {
    Seq out;
    out.reserve(seq_len);
    for (std::size_t t = 0; t < seq_len; ++t) {
        Eigen::MatrixXd step(static_cast<Eigen::Index>(starts.size()), values.cols());
        for (std::size_t b = 0; b < starts.size(); ++b) {
            step.row(static_cast<Eigen::Index>(b)) =
                values.row(static_cast<Eigen::Index>(starts[b] + t));
        }
        out.push_back(std::move(step));
    }
    return out;
}

}  // namespace

SequenceBatch make_sequence_batch(const PanelDataset& data, std::size_t seq_len,
                                  std::size_t stride) {
    data.validate();
    if (!data.time_indexed) {
        throw std::runtime_error("make_sequence_batch: data must be time-indexed");
    }
    SequenceBatch batch;
    batch.stride = stride;
    batch.windows = gather_windows(data.values, window_starts_for(data.rows(), seq_len, stride),
                                   seq_len);
    return batch;
}

PanelDataset unslice(const SequenceBatch& batch, const std::vector<std::string>& columns) {
    const std::size_t n_windows = batch.batch();
    const std::size_t seq_len = batch.length();
    PanelDataset out;
    out.columns = columns;
    out.time_indexed = true;
    out.values.resize(static_cast<Eigen::Index>(n_windows * seq_len),
                      batch.windows.front().cols());
    for (std::size_t w = 0; w < n_windows; ++w) {
        for (std::size_t t = 0; t < seq_len; ++t) {
            out.values.row(static_cast<Eigen::Index>(w * seq_len + t)) =
                batch.windows[t].row(static_cast<Eigen::Index>(w));
        }
        if (w > 0) out.window_starts.push_back(w * seq_len);
    }
    return out;
}

double reconstruction_loss(TimeGanNets& nets, const SequenceBatch& batch) {
    const Seq h = nets.embedder.forward_seq(batch.windows);
    const Seq x_tilde = nets.recovery.forward_seq(h);
    return l2_distance_loss(x_tilde, batch.windows).value;
}

double supervised_loss(TimeGanNets& nets, const SequenceBatch& batch) {
    const Seq h = nets.embedder.forward_seq(batch.windows);
    const Seq s_hat = nets.supervisor.forward_seq(h);
    return supervised_eval(h, s_hat).loss;
}

UnsupervisedLoss unsupervised_loss(TimeGanNets& nets, const SequenceBatch& real_batch,
                                   const Seq& fake_latents) {
    const Seq h = nets.embedder.forward_seq(real_batch.windows);
    const Seq y_real = nets.discriminator.forward_seq(h);
    const Seq y_fake = nets.discriminator.forward_seq(fake_latents);
    UnsupervisedLoss out;
    out.discriminator = bce_loss_seq(y_real, 1.0).value + bce_loss_seq(y_fake, 0.0).value;
    out.generator = bce_loss_seq(y_fake, 1.0).value;
    return out;
}

TimeGanNets train_timegan(const PanelDataset& data, const TimeGanConfig& cfg) {
    data.validate();
    if (!data.time_indexed) throw std::runtime_error("train_timegan: data must be time-indexed");
    const std::size_t k = data.cols();
    if (cfg.latent_dim >= k) {
        throw std::runtime_error("train_timegan: latent_dim must stay below the feature count");
    }

    TimeGanNets nets;
    nets.columns = data.columns;
    nets.latent_dim = cfg.latent_dim;
    nets.noise_dim = cfg.noise_dim;
    nets.seq_len = cfg.seq_len;
    nets.scaler = Scaler::fit(data.values);
    const Eigen::MatrixXd standardized = nets.scaler.transform(data.values);

    const std::size_t h_dim = cfg.latent_dim;
    nets.embedder = Network({GruSpec{k, h_dim}, DenseSpec{h_dim, h_dim, Activation::Sigmoid}},
                            derive_seed(cfg.seed, 1));
    nets.recovery = Network({GruSpec{h_dim, h_dim}, DenseSpec{h_dim, k, Activation::Identity}},
                            derive_seed(cfg.seed, 2));
    nets.generator =
        Network({GruSpec{cfg.noise_dim, h_dim}, DenseSpec{h_dim, h_dim, Activation::Sigmoid}},
                derive_seed(cfg.seed, 3));
    nets.supervisor = Network({GruSpec{h_dim, h_dim}, DenseSpec{h_dim, h_dim, Activation::Sigmoid}},
                              derive_seed(cfg.seed, 4));
    nets.discriminator = Network({GruSpec{h_dim, h_dim}, DenseSpec{h_dim, 1, Activation::Sigmoid}},
                                 derive_seed(cfg.seed, 5));

    const std::vector<std::size_t> starts =
        window_starts_for(data.rows(), cfg.seq_len, cfg.stride);
    if (starts.size() < cfg.batch_size) {
        throw std::runtime_error("train_timegan: too few windows for the batch size");
    }
    const std::size_t batches_per_epoch = std::max<std::size_t>(1, starts.size() / cfg.batch_size);

    Rng rng(derive_seed(cfg.seed, 6));
    const auto batch_rows = static_cast<Eigen::Index>(cfg.batch_size);

    const auto draw_batch = [&]() {
        std::vector<std::size_t> chosen(cfg.batch_size);
        for (std::size_t i = 0; i < cfg.batch_size; ++i) {
            chosen[i] = starts[rng.index(starts.size())];
        }
        return gather_windows(standardized, chosen, cfg.seq_len);
    };

    // Fixed probe windows give the logged training curves; per-batch losses
    // jitter with the batch draw.
    const Seq probe = [&]() {
        const std::size_t count = std::min<std::size_t>(starts.size(), 256);
        std::vector<std::size_t> chosen(count);
        for (std::size_t i = 0; i < count; ++i) {
            chosen[i] = starts[i * starts.size() / count];
        }
        return gather_windows(standardized, chosen, cfg.seq_len);
    }();

    const auto probe_reconstruction = [&]() {
        const Seq h = nets.embedder.forward_seq(probe);
        return l2_distance_loss(nets.recovery.forward_seq(h), probe).value;
    };
    const auto probe_supervised = [&]() {
        const Seq h = nets.embedder.forward_seq(probe);
        return supervised_eval(h, nets.supervisor.forward_seq(h)).loss;
    };

    const auto check_finite = [](double v, const char* phase) {
        if (!std::isfinite(v)) {
            throw std::runtime_error(std::string("train_timegan: diverged during ") + phase);
        }
    };

    // Phase 1: embedder + recovery on the reconstruction loss.
    {
        OptimizerState opt;
        opt.learning_rate = cfg.learning_rate;
        opt.beta1 = cfg.adam_beta1;
        opt.beta2 = cfg.adam_beta2;
        for (std::size_t epoch = 0; epoch < cfg.epochs_embed; ++epoch) {
            double loss_sum = 0.0;
            for (std::size_t b = 0; b < batches_per_epoch; ++b) {
                const Seq x = draw_batch();
                const Seq h = nets.embedder.forward_seq(x);
                const Seq x_tilde = nets.recovery.forward_seq(h);
                const SeqLossValue lr = l2_distance_loss(x_tilde, x);
                const Gradients rec_grads = nets.recovery.backward_seq(lr.grad);
                const Gradients emb_grads = nets.embedder.backward_seq(rec_grads.wrt_input);
                std::vector<Eigen::MatrixXd> grads = emb_grads.by_param;
                for (const auto& g : rec_grads.by_param) grads.push_back(g);
                optimizer_step(opt, concat_params(nets.embedder, nets.recovery), grads);
                loss_sum += lr.value;
                check_finite(lr.value, "embedding");
            }
            (void)loss_sum;
            nets.log.push_back({"embed", epoch, probe_reconstruction(), 0.0, 0.0, 0.0});
        }
    }

    // Phase 2: supervisor alone on the one-step-ahead loss.
    {
        OptimizerState opt;
        opt.learning_rate = cfg.learning_rate;
        opt.beta1 = cfg.adam_beta1;
        opt.beta2 = cfg.adam_beta2;
        for (std::size_t epoch = 0; epoch < cfg.epochs_supervise; ++epoch) {
            double loss_sum = 0.0;
            for (std::size_t b = 0; b < batches_per_epoch; ++b) {
                const Seq x = draw_batch();
                const Seq h = nets.embedder.forward_seq(x);
                const Seq s_hat = nets.supervisor.forward_seq(h);
                const SupervisedEval eval = supervised_eval(h, s_hat);
                const Gradients sup_grads = nets.supervisor.backward_seq(eval.grad_wrt_outputs);
                optimizer_step(opt, nets.supervisor.params(), sup_grads.by_param);
                loss_sum += eval.loss;
                check_finite(eval.loss, "supervision");
            }
            (void)loss_sum;
            nets.log.push_back({"supervise", epoch, 0.0, probe_supervised(), 0.0, 0.0});
        }
    }

    // Phase 3: joint adversarial training.
    {
        OptimizerState g_opt, ae_opt, d_opt;
        for (auto* opt : {&g_opt, &ae_opt, &d_opt}) {
            opt->learning_rate = cfg.learning_rate;
            opt->beta1 = cfg.adam_beta1;
            opt->beta2 = cfg.adam_beta2;
        }
        const auto noise_dim = static_cast<Eigen::Index>(cfg.noise_dim);
        for (std::size_t epoch = 0; epoch < cfg.epochs_joint; ++epoch) {
            double d_sum = 0.0, g_sum = 0.0, r_sum = 0.0, s_sum = 0.0;
            for (std::size_t b = 0; b < batches_per_epoch; ++b) {
                // (a) generator + supervisor: adversarial + lambda * supervised.
                {
                    const Seq z = gaussian_seq(cfg.seq_len, batch_rows, noise_dim, rng);
                    const Seq e = nets.generator.forward_seq(z);
                    const Seq h_hat = nets.supervisor.forward_seq(e);
                    const Seq y_fake = nets.discriminator.forward_seq(h_hat);
                    const SeqLossValue adv = bce_loss_seq(y_fake, 1.0);
                    const Gradients disc_pass = nets.discriminator.backward_seq(adv.grad);
                    const Gradients sup_fake = nets.supervisor.backward_seq(disc_pass.wrt_input);
                    const Gradients gen_grads = nets.generator.backward_seq(sup_fake.wrt_input);

                    const Seq x = draw_batch();
                    const Seq h = nets.embedder.forward_seq(x);
                    const Seq s_hat = nets.supervisor.forward_seq(h);
                    const SupervisedEval sup = supervised_eval(h, s_hat);
                    const Gradients sup_real = nets.supervisor.backward_seq(sup.grad_wrt_outputs);

                    std::vector<Eigen::MatrixXd> grads = gen_grads.by_param;
                    const std::vector<Eigen::MatrixXd> sup_total = add_grads(
                        sup_fake.by_param, sup_real.by_param, cfg.lambda_supervised);
                    for (const auto& g : sup_total) grads.push_back(g);
                    optimizer_step(g_opt, concat_params(nets.generator, nets.supervisor), grads);
                    g_sum += adv.value + cfg.lambda_supervised * sup.loss;
                    s_sum += sup.loss;
                    check_finite(adv.value, "joint generator");
                }

                // (b) autoencoder: reconstruction + kappa * supervised.
                {
                    const Seq x = draw_batch();
                    const Seq h = nets.embedder.forward_seq(x);
                    const Seq x_tilde = nets.recovery.forward_seq(h);
                    const SeqLossValue lr = l2_distance_loss(x_tilde, x);
                    const Gradients rec_grads = nets.recovery.backward_seq(lr.grad);

                    const Seq s_hat = nets.supervisor.forward_seq(h);
                    const SupervisedEval sup = supervised_eval(h, s_hat);
                    const Gradients sup_pass = nets.supervisor.backward_seq(sup.grad_wrt_outputs);
                    // dL_S/dh: through the supervisor input plus the target side.
                    const Seq sup_h_grad = add_seqs(sup_pass.wrt_input, sup.grad_wrt_inputs);

                    const Seq emb_out_grad =
                        add_seqs(rec_grads.wrt_input, sup_h_grad, cfg.kappa_supervised);
                    const Gradients emb_grads = nets.embedder.backward_seq(emb_out_grad);
                    std::vector<Eigen::MatrixXd> grads = emb_grads.by_param;
                    for (const auto& g : rec_grads.by_param) grads.push_back(g);
                    optimizer_step(ae_opt, concat_params(nets.embedder, nets.recovery), grads);
                    r_sum += lr.value;
                    check_finite(lr.value, "joint autoencoder");
                }

                // (c) discriminator on real vs generated latent sequences.
                {
                    const Seq x = draw_batch();
                    const Seq h = nets.embedder.forward_seq(x);
                    const Seq z = gaussian_seq(cfg.seq_len, batch_rows, noise_dim, rng);
                    const Seq e = nets.generator.forward_seq(z);
                    const Seq h_hat = nets.supervisor.forward_seq(e);

                    const Seq y_real = nets.discriminator.forward_seq(h);
                    const SeqLossValue real_loss = bce_loss_seq(y_real, 1.0);
                    const Gradients d_real = nets.discriminator.backward_seq(real_loss.grad);
                    const Seq y_fake = nets.discriminator.forward_seq(h_hat);
                    const SeqLossValue fake_loss = bce_loss_seq(y_fake, 0.0);
                    const Gradients d_fake = nets.discriminator.backward_seq(fake_loss.grad);
                    optimizer_step(d_opt, nets.discriminator.params(),
                                   add_grads(d_real.by_param, d_fake.by_param, 1.0));
                    d_sum += real_loss.value + fake_loss.value;
                    check_finite(real_loss.value + fake_loss.value, "joint discriminator");
                }
            }
            const double denom = static_cast<double>(batches_per_epoch);
            nets.log.push_back(
                {"joint", epoch, r_sum / denom, s_sum / denom, d_sum / denom, g_sum / denom});
        }
    }
    return nets;
}

PanelDataset sample_timegan(const TimeGanNets& nets, std::size_t n_windows, std::uint64_t seed) {
    if (n_windows < 1) throw std::runtime_error("sample_timegan: need at least one window");
    Rng rng(seed);
    Network generator = nets.generator;
    Network supervisor = nets.supervisor;
    Network recovery = nets.recovery;

    PanelDataset out;
    out.columns = nets.columns;
    out.time_indexed = true;
    const std::size_t k = nets.columns.size();
    out.values.resize(static_cast<Eigen::Index>(n_windows * nets.seq_len),
                      static_cast<Eigen::Index>(k));

    const std::size_t chunk = 256;
    std::size_t done = 0;
    while (done < n_windows) {
        const std::size_t take = std::min(chunk, n_windows - done);
        const Seq z = gaussian_seq(nets.seq_len, static_cast<Eigen::Index>(take),
                                   static_cast<Eigen::Index>(nets.noise_dim), rng);
        const Seq e = generator.forward_seq(z);
        const Seq h_hat = supervisor.forward_seq(e);
        const Seq x_hat = recovery.forward_seq(h_hat);
        for (std::size_t w = 0; w < take; ++w) {
            for (std::size_t t = 0; t < nets.seq_len; ++t) {
                out.values.row(static_cast<Eigen::Index>((done + w) * nets.seq_len + t)) =
                    x_hat[t].row(static_cast<Eigen::Index>(w));
            }
        }
        done += take;
    }
    out.values = nets.scaler.inverse(out.values);
    for (std::size_t w = 1; w < n_windows; ++w) out.window_starts.push_back(w * nets.seq_len);
    return out;
}

void save_timegan(const TimeGanNets& nets, const std::string& path) {
    nlohmann::json j;
    j["format"] = "causalsynth-timegan";
    j["columns"] = nets.columns;
    j["latent_dim"] = nets.latent_dim;
    j["noise_dim"] = nets.noise_dim;
    j["seq_len"] = nets.seq_len;
    j["scaler_mean"] = std::vector<double>(nets.scaler.mean.data(),
                                           nets.scaler.mean.data() + nets.scaler.mean.size());
    j["scaler_sd"] =
        std::vector<double>(nets.scaler.sd.data(), nets.scaler.sd.data() + nets.scaler.sd.size());
    j["embedder"] = nlohmann::json::parse(network_to_json(nets.embedder, 0));
    j["recovery"] = nlohmann::json::parse(network_to_json(nets.recovery, 0));
    j["generator"] = nlohmann::json::parse(network_to_json(nets.generator, 0));
    j["supervisor"] = nlohmann::json::parse(network_to_json(nets.supervisor, 0));
    j["discriminator"] = nlohmann::json::parse(network_to_json(nets.discriminator, 0));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump() << '\n';
}

TimeGanNets load_timegan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "causalsynth-timegan") {
        throw std::runtime_error("load_timegan: unrecognized format");
    }
    TimeGanNets nets;
    nets.columns = j.at("columns").get<std::vector<std::string>>();
    nets.latent_dim = j.at("latent_dim").get<std::size_t>();
    nets.noise_dim = j.at("noise_dim").get<std::size_t>();
    nets.seq_len = j.at("seq_len").get<std::size_t>();
    const auto mean = j.at("scaler_mean").get<std::vector<double>>();
    const auto sd = j.at("scaler_sd").get<std::vector<double>>();
    nets.scaler.mean = Eigen::Map<const Eigen::RowVectorXd>(mean.data(),
                                                            static_cast<Eigen::Index>(mean.size()));
    nets.scaler.sd =
        Eigen::Map<const Eigen::RowVectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    nets.embedder = network_from_json(j.at("embedder").dump()).net;
    nets.recovery = network_from_json(j.at("recovery").dump()).net;
    nets.generator = network_from_json(j.at("generator").dump()).net;
    nets.supervisor = network_from_json(j.at("supervisor").dump()).net;
    nets.discriminator = network_from_json(j.at("discriminator").dump()).net;
    return nets;
}

}  // namespace causalsynth
