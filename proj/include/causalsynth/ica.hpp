#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace causalsynth {

struct IcaResult {
    /// Unmixing in the original (centered) data space: sources = X_c * W^T.
    Eigen::MatrixXd unmixing;
    /// Unmixing in whitened coordinates; rows are orthonormal.
    Eigen::MatrixXd unmixing_whitened;
    /// Whitening transform: X_white = X_c * whitening^T.
    Eigen::MatrixXd whitening;
    Eigen::MatrixXd sources;  // T x K
    std::size_t convergence_iters = 0;
    /// False when every recovered source looks Gaussian (|excess kurtosis|
    /// small); the rotation is then not identifiable.
    bool identifiable = true;
};

struct IcaOptions {
    double tolerance = 1e-6;
    std::size_t max_iterations = 500;
    /// Mean |excess kurtosis| of the sources below this flags the result as
    /// non-identifiable.
    double gaussianity_threshold = 0.15;
};

/// FastICA with the log-cosh contrast and symmetric decorrelation. Columns
/// are centered and whitened through an eigendecomposition of the covariance.
/// Throws on non-convergence, carrying the iteration trace in the message.
IcaResult fastica(const Eigen::MatrixXd& data, std::uint64_t seed,
                  const IcaOptions& options = {});

}  // namespace causalsynth
