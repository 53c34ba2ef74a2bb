#pragma once

#include "causalsynth/gan.hpp"
#include "causalsynth/net.hpp"
#include "causalsynth/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace causalsynth {

/// Windows sliced from a time-indexed dataset: B x L x K, time-major.
/// Row order inside each window matches the source rows.
struct SequenceBatch {
    Seq windows;  // L matrices of B x K
    std::size_t stride = 1;

    std::size_t batch() const { return windows.empty() ? 0 : static_cast<std::size_t>(windows.front().rows()); }
    std::size_t length() const { return windows.size(); }
};

/// All windows of the dataset at the given stride.
SequenceBatch make_sequence_batch(const PanelDataset& data, std::size_t seq_len,
                                  std::size_t stride);

/// Inverse of make_sequence_batch for stride == length: concatenates the
/// windows back into rows.
PanelDataset unslice(const SequenceBatch& batch, const std::vector<std::string>& columns);

struct TimeGanConfig {
    std::size_t seq_len = 24;
    std::size_t stride = 1;
    std::size_t latent_dim = 4;  // must stay below the feature count
    std::size_t noise_dim = 5;
    std::size_t batch_size = 128;
    std::size_t epochs_embed = 100;
    std::size_t epochs_supervise = 100;
    std::size_t epochs_joint = 300;
    double learning_rate = 2e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    double lambda_supervised = 1.0;  // generator-side mixing weight
    double kappa_supervised = 10.0;  // autoencoder-side mixing weight
    std::uint64_t seed = 1;
};

struct TimeGanEpochLog {
    std::string phase;
    std::size_t epoch = 0;
    double reconstruction = 0.0;
    double supervised = 0.0;
    double d_loss = 0.0;
    double g_adversarial = 0.0;
};

/// Embedder/recovery autoencoder, autoregressive generator, supervisor and
/// latent-sequence discriminator. The static-feature branch of the losses is
/// carried as a zero-length vector (the panels here have no static features).
struct TimeGanNets {
    Network embedder;       // x_t -> h_t
    Network recovery;       // h_t -> x~_t
    Network generator;      // z_t -> e_t (latent proposal)
    Network supervisor;     // latent sequence -> next-step latent
    Network discriminator;  // latent sequence -> per-step realness
    Scaler scaler;
    std::vector<std::string> columns;
    std::size_t latent_dim = 0;
    std::size_t noise_dim = 0;
    std::size_t seq_len = 0;
    std::size_t static_dim = 0;
    std::vector<TimeGanEpochLog> log;
};

/// Mean L2 distance between inputs and their reconstruction.
double reconstruction_loss(TimeGanNets& nets, const SequenceBatch& batch);

/// Mean squared one-step-ahead error of the supervisor on real latent codes.
double supervised_loss(TimeGanNets& nets, const SequenceBatch& batch);

struct UnsupervisedLoss {
    double discriminator = 0.0;  // BCE, real labelled 1, fake labelled 0
    double generator = 0.0;      // BCE of fake latents against label 1
};
UnsupervisedLoss unsupervised_loss(TimeGanNets& nets, const SequenceBatch& real_batch,
                                   const Seq& fake_latents);

/// Three-phase schedule: autoencoder, supervisor, then joint adversarial
/// training (generator/supervisor against the discriminator, autoencoder
/// refreshed with the supervised term mixed in).
TimeGanNets train_timegan(const PanelDataset& data, const TimeGanConfig& cfg);

/// Rolls n_windows latent sequences from noise, recovers features and
/// concatenates the windows into one time-indexed dataset with recorded
/// window boundaries.
PanelDataset sample_timegan(const TimeGanNets& nets, std::size_t n_windows, std::uint64_t seed);

void save_timegan(const TimeGanNets& nets, const std::string& path);
TimeGanNets load_timegan(const std::string& path);

}  // namespace causalsynth
