#pragma once

#include "causalsynth/tensor.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace causalsynth {

enum class Activation { Identity, Relu, Tanh, Sigmoid };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation act = Activation::Identity;
};

struct GruSpec {
    std::size_t in = 0;
    std::size_t hidden = 0;
};

using LayerSpec = std::variant<DenseSpec, GruSpec>;

/// Time-major sequence: L matrices of batch x features. Cross-sectional data
/// is the L = 1 case.
using Seq = std::vector<Eigen::MatrixXd>;

/// Gradients from one backward pass: one matrix per parameter (aligned with
/// Network::params()) plus the gradient with respect to the network input,
/// which lets callers chain networks (generator through discriminator).
struct Gradients {
    std::vector<Eigen::MatrixXd> by_param;
    Seq wrt_input;
};

/// Feedforward stack over sequences. Dense layers apply per time step; GRU
/// layers scan left to right from a zero initial state. forward() caches the
/// activations backward() consumes.
class Network {
public:
    Network() = default;
    Network(std::vector<LayerSpec> architecture, std::uint64_t init_seed);

    const std::vector<LayerSpec>& architecture() const { return architecture_; }
    std::size_t param_count() const;
    std::size_t input_dim() const;
    std::size_t output_dim() const;

    Seq forward_seq(const Seq& input);
    Eigen::MatrixXd forward(const Eigen::MatrixXd& input);

    Gradients backward_seq(const Seq& loss_grad);
    Gradients backward(const Eigen::MatrixXd& loss_grad);

    std::vector<Eigen::MatrixXd*> params();
    std::vector<const Eigen::MatrixXd*> params() const;

    /// Weight tensors in params() order (checkpoint surface).
    std::vector<Tensor> weights() const;
    void set_weights(const std::vector<Tensor>& weights);

private:
    struct DenseLayer {
        DenseSpec spec;
        Eigen::MatrixXd w;  // in x out
        Eigen::MatrixXd b;  // 1 x out
        Seq inputs;         // cache
        Seq pre_acts;       // cache
    };
    struct GruLayer {
        GruSpec spec;
        Eigen::MatrixXd wx;  // in x 3H, blocks [r | u | c]
        Eigen::MatrixXd wh;  // H  x 3H
        Eigen::MatrixXd b;   // 1  x 3H
        Seq inputs, h_prev, r, u, c;  // caches per step
    };
    using Layer = std::variant<DenseLayer, GruLayer>;

    std::vector<LayerSpec> architecture_;
    std::vector<Layer> layers_;
    bool have_cache_ = false;
};

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z);
Eigen::MatrixXd activation_grad(Activation act, const Eigen::MatrixXd& z,
                                const Eigen::MatrixXd& out_grad);

}  // namespace causalsynth
