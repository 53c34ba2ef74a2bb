#pragma once

#include "causalsynth/net.hpp"
#include "causalsynth/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace causalsynth {

/// Per-column standardization fitted on the training data and inverted on
/// sampling.
struct Scaler {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd sd;

    static Scaler fit(const Eigen::MatrixXd& values);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& values) const;
    Eigen::MatrixXd inverse(const Eigen::MatrixXd& values) const;
};

struct GanConfig {
    std::size_t latent_dim = 16;
    std::vector<std::size_t> generator_hidden = {64, 64};
    std::vector<std::size_t> discriminator_hidden = {64, 64};
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    /// false: generator descends E[log(1 - D(G(z)))], the literal minimax
    /// objective. true: ascends E[log D(G(z))] instead.
    bool non_saturating = false;
    std::uint64_t seed = 1;
};

struct EpochLog {
    std::size_t epoch = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
};

struct TrainedGan {
    Network generator;
    Network discriminator;
    Scaler scaler;
    std::vector<std::string> columns;
    std::size_t latent_dim = 0;
    std::vector<EpochLog> log;
};

/// Alternating 1:1 discriminator/generator updates with binary cross
/// entropy. Deterministic per seed; a non-finite loss aborts with the log so
/// far in the message.
TrainedGan train_gan(const PanelDataset& data, const GanConfig& cfg);

/// n i.i.d. rows from the generator, de-standardized; time_indexed = false.
PanelDataset sample_gan(const TrainedGan& gan, std::size_t n, std::uint64_t seed);

/// Discriminator probabilities on rows matching the training schema.
Eigen::VectorXd discriminator_score(const TrainedGan& gan, const PanelDataset& rows);

std::string training_log_to_json(const std::vector<EpochLog>& log);

void save_gan(const TrainedGan& gan, const std::string& path);
TrainedGan load_gan(const std::string& path);

}  // namespace causalsynth
