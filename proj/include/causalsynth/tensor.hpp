#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace causalsynth {

/// Dense row-major value container used at module boundaries (checkpoints,
/// inputs handed across the API). Internals compute on Eigen matrices.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    std::size_t size() const;

    /// Throws when |data| != product(shape) or any entry is NaN/Inf.
    void validate() const;

    static Tensor from_matrix(const Eigen::MatrixXd& m);
    Eigen::MatrixXd matrix() const;  // rank-2 tensors only
};

}  // namespace causalsynth
