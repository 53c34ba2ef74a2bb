#pragma once

#include "causalsynth/net.hpp"

#include <Eigen/Dense>

namespace causalsynth {

struct LossValue {
    double value = 0.0;
    Eigen::MatrixXd grad;  // with respect to the predictions
};

struct SeqLossValue {
    double value = 0.0;
    Seq grad;
};

/// Mean negative log-likelihood for binary labels. Predictions must lie in
/// (0, 1); a clamping margin of 1e-7 guards the log at the boundary.
LossValue bce_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels);
SeqLossValue bce_loss_seq(const Seq& predictions, double label);

/// Mean over (batch, step) of the unsquared L2 norm ||target - output||_2.
SeqLossValue l2_distance_loss(const Seq& outputs, const Seq& targets);

/// Mean over (batch, step) of the squared L2 norm.
SeqLossValue squared_error_loss(const Seq& outputs, const Seq& targets);

}  // namespace causalsynth
