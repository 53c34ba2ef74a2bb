#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace causalsynth {

/// Adaptive-moment stochastic gradient state. Moment accumulators mirror the
/// parameter shapes and are allocated on the first step.
struct OptimizerState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t step = 0;
    std::vector<Eigen::MatrixXd> first_moment;
    std::vector<Eigen::MatrixXd> second_moment;
};

/// One update in place. Throws if the update would store a non-finite weight.
void optimizer_step(OptimizerState& state, std::vector<Eigen::MatrixXd*> params,
                    const std::vector<Eigen::MatrixXd>& grads);

}  // namespace causalsynth
