#include "causalsynth/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace causalsynth {

std::size_t Tensor::size() const {
    std::size_t total = 1;
    for (std::size_t d : shape) total *= d;
    return shape.empty() ? 0 : total;
}

void Tensor::validate() const {
    if (data.size() != size()) {
        throw std::runtime_error("Tensor: data length does not match shape");
    }
    for (double v : data) {
        if (!std::isfinite(v)) throw std::runtime_error("Tensor: non-finite entry");
    }
}

Tensor Tensor::from_matrix(const Eigen::MatrixXd& m) {
    Tensor t;
    t.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
    t.data.resize(t.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            t.data[static_cast<std::size_t>(r) * static_cast<std::size_t>(m.cols()) +
                   static_cast<std::size_t>(c)] = m(r, c);
        }
    }
    return t;
}

Eigen::MatrixXd Tensor::matrix() const {
    if (shape.size() != 2) throw std::runtime_error("Tensor: matrix() requires rank 2");
    validate();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1]));
    for (std::size_t r = 0; r < shape[0]; ++r) {
        for (std::size_t c = 0; c < shape[1]; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * shape[1] + c];
        }
    }
    return m;
}

}  // namespace causalsynth
