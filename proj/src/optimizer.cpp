#include "causalsynth/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace causalsynth {

void optimizer_step(OptimizerState& state, std::vector<Eigen::MatrixXd*> params,
                    const std::vector<Eigen::MatrixXd>& grads) {
    if (params.size() != grads.size()) {
        throw std::runtime_error("optimizer_step: parameter/gradient count mismatch");
    }
    if (state.first_moment.empty()) {
        for (const auto* p : params) {
            state.first_moment.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
            state.second_moment.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw std::runtime_error("optimizer_step: accumulator count mismatch");
    }

    state.step += 1;
    const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Eigen::MatrixXd& p = *params[i];
        const Eigen::MatrixXd& g = grads[i];
        if (p.rows() != g.rows() || p.cols() != g.cols()) {
            throw std::runtime_error("optimizer_step: gradient shape mismatch");
        }
        Eigen::MatrixXd& m = state.first_moment[i];
        Eigen::MatrixXd& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = (state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square()).matrix();
        const Eigen::ArrayXXd m_hat = m.array() / bias1;
        const Eigen::ArrayXXd v_hat = v.array() / bias2;
        p.array() -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        if (!p.allFinite()) {
            throw std::runtime_error("optimizer_step: non-finite weight after update (step " +
                                     std::to_string(state.step) + ", tensor " + std::to_string(i) +
                                     ")");
        }
    }
}

}  // namespace causalsynth
