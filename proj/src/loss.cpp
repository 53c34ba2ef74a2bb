#include "causalsynth/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace causalsynth {

namespace {
constexpr double kClampMargin = 1e-7;
}

LossValue bce_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels) {
    if (predictions.rows() != labels.rows() || predictions.cols() != labels.cols()) {
        throw std::runtime_error("bce_loss: prediction/label shape mismatch");
    }
    const double n = static_cast<double>(predictions.size());
    if (n == 0.0) throw std::runtime_error("bce_loss: empty input");

    LossValue out;
    out.grad = Eigen::MatrixXd::Zero(predictions.rows(), predictions.cols());
    double total = 0.0;
    for (Eigen::Index r = 0; r < predictions.rows(); ++r) {
        for (Eigen::Index c = 0; c < predictions.cols(); ++c) {
            const double raw = predictions(r, c);
            if (!(raw > -kClampMargin && raw < 1.0 + kClampMargin)) {
                throw std::runtime_error("bce_loss: prediction outside (0, 1)");
            }
            const double p = std::min(1.0 - kClampMargin, std::max(kClampMargin, raw));
            const double y = labels(r, c);
            total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
            out.grad(r, c) = (-y / p + (1.0 - y) / (1.0 - p)) / n;
        }
    }
    out.value = total / n;
    return out;
}

SeqLossValue bce_loss_seq(const Seq& predictions, double label) {
    if (predictions.empty()) throw std::runtime_error("bce_loss_seq: empty sequence");
    std::size_t total_entries = 0;
    for (const auto& step : predictions) total_entries += static_cast<std::size_t>(step.size());

    SeqLossValue out;
    out.grad.reserve(predictions.size());
    double total = 0.0;
    const double n = static_cast<double>(total_entries);
    for (const auto& step : predictions) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(step.rows(), step.cols());
        for (Eigen::Index r = 0; r < step.rows(); ++r) {
            for (Eigen::Index c = 0; c < step.cols(); ++c) {
                const double raw = step(r, c);
                if (!(raw > -kClampMargin && raw < 1.0 + kClampMargin)) {
                    throw std::runtime_error("bce_loss_seq: prediction outside (0, 1)");
                }
                const double p = std::min(1.0 - kClampMargin, std::max(kClampMargin, raw));
                total += -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
                g(r, c) = (-label / p + (1.0 - label) / (1.0 - p)) / n;
            }
        }
        out.grad.push_back(std::move(g));
    }
    out.value = total / n;
    return out;
}

SeqLossValue l2_distance_loss(const Seq& outputs, const Seq& targets) {
    if (outputs.size() != targets.size() || outputs.empty()) {
        throw std::runtime_error("l2_distance_loss: sequence length mismatch");
    }
    const double count = static_cast<double>(outputs.size()) *
                         static_cast<double>(outputs.front().rows());
    SeqLossValue out;
    out.grad.reserve(outputs.size());
    double total = 0.0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        const Eigen::MatrixXd diff = outputs[t] - targets[t];
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(diff.rows(), diff.cols());
        for (Eigen::Index r = 0; r < diff.rows(); ++r) {
            const double norm = diff.row(r).norm();
            total += norm;
            if (norm > 1e-12) g.row(r) = diff.row(r) / (norm * count);
        }
        out.grad.push_back(std::move(g));
    }
    out.value = total / count;
    return out;
}

SeqLossValue squared_error_loss(const Seq& outputs, const Seq& targets) {
    if (outputs.size() != targets.size() || outputs.empty()) {
        throw std::runtime_error("squared_error_loss: sequence length mismatch");
    }
    const double count = static_cast<double>(outputs.size()) *
                         static_cast<double>(outputs.front().rows());
    SeqLossValue out;
    out.grad.reserve(outputs.size());
    double total = 0.0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        const Eigen::MatrixXd diff = outputs[t] - targets[t];
        total += diff.squaredNorm();
        out.grad.push_back(2.0 * diff / count);
    }
    out.value = total / count;
    return out;
}

}  // namespace causalsynth
