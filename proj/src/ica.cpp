#include "causalsynth/ica.hpp"

#include "causalsynth/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace causalsynth {

namespace {

/// Symmetric decorrelation: W <- (W W^T)^{-1/2} W.
Eigen::MatrixXd symmetric_decorrelate(const Eigen::MatrixXd& w) {
    const Eigen::MatrixXd wwt = w * w.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(wwt);
    const Eigen::VectorXd vals = eig.eigenvalues();
    Eigen::VectorXd inv_sqrt(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals(i) <= 0.0) throw std::runtime_error("fastica: degenerate decorrelation");
        inv_sqrt(i) = 1.0 / std::sqrt(vals(i));
    }
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() * w;
}

double excess_kurtosis(const Eigen::VectorXd& v) {
    const double m = v.mean();
    const Eigen::ArrayXd centered = v.array() - m;
    const double m2 = centered.square().mean();
    const double m4 = centered.square().square().mean();
    if (m2 <= 0.0) return 0.0;
    return m4 / (m2 * m2) - 3.0;
}

}  // namespace

IcaResult fastica(const Eigen::MatrixXd& data, std::uint64_t seed, const IcaOptions& options) {
    const Eigen::Index n = data.rows();
    const Eigen::Index k = data.cols();
    if (k < 2) throw std::runtime_error("fastica: need at least 2 columns");
    if (n < 10) throw std::runtime_error("fastica: need at least 10 rows");

    Eigen::MatrixXd centered = data;
    centered.rowwise() -= data.colwise().mean();

    // Whitening via eigendecomposition of the covariance.
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd vals = eig.eigenvalues();
    Eigen::VectorXd inv_sqrt(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (vals(i) <= 1e-12) throw std::runtime_error("fastica: rank-deficient covariance");
        inv_sqrt(i) = 1.0 / std::sqrt(vals(i));
    }
    IcaResult out;
    out.whitening = inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixXd white = centered * out.whitening.transpose();

    // Random orthonormal start.
    Rng rng(seed);
    Eigen::MatrixXd w(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) w(r, c) = rng.gaussian(0.0, 1.0);
    }
    w = symmetric_decorrelate(w);

    // Fixed-point iterations with g = tanh (log-cosh contrast).
    std::vector<double> trace;
    bool converged = false;
    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const Eigen::MatrixXd proj = white * w.transpose();  // n x k
        const Eigen::ArrayXXd g = proj.array().tanh();
        const Eigen::ArrayXXd g_prime = 1.0 - g.square();
        Eigen::MatrixXd w_new = (g.matrix().transpose() * white) / static_cast<double>(n);
        const Eigen::VectorXd mean_gp = g_prime.colwise().mean();
        w_new -= mean_gp.asDiagonal() * w;
        w_new = symmetric_decorrelate(w_new);

        // Convergence: every direction aligned with its previous self.
        double delta = 0.0;
        for (Eigen::Index r = 0; r < k; ++r) {
            delta = std::max(delta, std::abs(1.0 - std::abs(w_new.row(r).dot(w.row(r)))));
        }
        trace.push_back(delta);
        w = w_new;
        if (delta < options.tolerance) {
            converged = true;
            ++iter;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "fastica: no convergence after " << options.max_iterations
            << " iterations; trace tail:";
        const std::size_t tail = trace.size() > 8 ? trace.size() - 8 : 0;
        for (std::size_t i = tail; i < trace.size(); ++i) msg << ' ' << trace[i];
        throw std::runtime_error(msg.str());
    }

    out.unmixing_whitened = w;
    out.unmixing = w * out.whitening;
    out.sources = centered * out.unmixing.transpose();
    out.convergence_iters = iter;

    double mean_abs_kurt = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
        mean_abs_kurt += std::abs(excess_kurtosis(out.sources.col(c)));
    }
    mean_abs_kurt /= static_cast<double>(k);
    out.identifiable = mean_abs_kurt >= options.gaussianity_threshold;
    return out;
}

}  // namespace causalsynth
