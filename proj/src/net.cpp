#include "causalsynth/net.hpp"

#include "causalsynth/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace causalsynth {

namespace {

Eigen::MatrixXd init_uniform(std::size_t rows, std::size_t cols, double limit, Rng& rng) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = rng.uniform(-limit, limit);
        }
    }
    return m;
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) {
        throw std::runtime_error(std::string("network: non-finite ") + what);
    }
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw std::runtime_error("unknown activation '" + name + "'");
}

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z) {
    switch (act) {
        case Activation::Identity: return z;
        case Activation::Relu: return z.cwiseMax(0.0);
        case Activation::Tanh: return z.array().tanh().matrix();
        case Activation::Sigmoid: return sigmoid(z);
    }
    return z;
}

Eigen::MatrixXd activation_grad(Activation act, const Eigen::MatrixXd& z,
                                const Eigen::MatrixXd& out_grad) {
    switch (act) {
        case Activation::Identity:
            return out_grad;
        case Activation::Relu:
            return (z.array() > 0.0).cast<double>().matrix().cwiseProduct(out_grad);
        case Activation::Tanh: {
            const Eigen::ArrayXXd t = z.array().tanh();
            return ((1.0 - t.square()) * out_grad.array()).matrix();
        }
        case Activation::Sigmoid: {
            const Eigen::ArrayXXd s = sigmoid(z).array();
            return (s * (1.0 - s) * out_grad.array()).matrix();
        }
    }
    return out_grad;
}

Network::Network(std::vector<LayerSpec> architecture, std::uint64_t init_seed)
    : architecture_(std::move(architecture)) {
    Rng rng(init_seed);
    std::size_t prev_out = 0;
    bool first = true;
    for (const auto& spec : architecture_) {
        if (std::holds_alternative<DenseSpec>(spec)) {
            const auto& d = std::get<DenseSpec>(spec);
            if (!first && d.in != prev_out) {
                throw std::runtime_error("network: dense layer input does not match previous output");
            }
            DenseLayer layer;
            layer.spec = d;
            const double limit = 1.0 / std::sqrt(static_cast<double>(d.in));
            layer.w = init_uniform(d.in, d.out, limit, rng);
            layer.b = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(d.out));
            layers_.emplace_back(std::move(layer));
            prev_out = d.out;
        } else {
            const auto& g = std::get<GruSpec>(spec);
            if (!first && g.in != prev_out) {
                throw std::runtime_error("network: gru layer input does not match previous output");
            }
            GruLayer layer;
            layer.spec = g;
            const double limit = 1.0 / std::sqrt(static_cast<double>(g.in + g.hidden));
            layer.wx = init_uniform(g.in, 3 * g.hidden, limit, rng);
            layer.wh = init_uniform(g.hidden, 3 * g.hidden, limit, rng);
            layer.b = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(3 * g.hidden));
            layers_.emplace_back(std::move(layer));
            prev_out = g.hidden;
        }
        first = false;
    }
}

std::size_t Network::param_count() const {
    std::size_t total = 0;
    for (const auto* p : params()) total += static_cast<std::size_t>(p->size());
    return total;
}

std::size_t Network::input_dim() const {
    if (architecture_.empty()) throw std::runtime_error("network: empty architecture");
    const auto& spec = architecture_.front();
    return std::holds_alternative<DenseSpec>(spec) ? std::get<DenseSpec>(spec).in
                                                   : std::get<GruSpec>(spec).in;
}

std::size_t Network::output_dim() const {
    if (architecture_.empty()) throw std::runtime_error("network: empty architecture");
    const auto& spec = architecture_.back();
    return std::holds_alternative<DenseSpec>(spec) ? std::get<DenseSpec>(spec).out
                                                   : std::get<GruSpec>(spec).hidden;
}

Seq Network::forward_seq(const Seq& input) {
    if (input.empty()) throw std::runtime_error("network: empty input sequence");
    const Eigen::Index batch = input.front().rows();
    for (const auto& step : input) {
        check_finite(step, "input");
        if (static_cast<std::size_t>(step.cols()) != input_dim() || step.rows() != batch) {
            throw std::runtime_error("network: input shape mismatch");
        }
    }

    Seq current = input;
    for (auto& layer : layers_) {
        if (std::holds_alternative<DenseLayer>(layer)) {
            auto& d = std::get<DenseLayer>(layer);
            d.inputs = current;
            d.pre_acts.clear();
            Seq next;
            next.reserve(current.size());
            for (const auto& x : current) {
                Eigen::MatrixXd z = (x * d.w).rowwise() + d.b.row(0);
                d.pre_acts.push_back(z);
                next.push_back(apply_activation(d.spec.act, z));
            }
            current = std::move(next);
        } else {
            auto& g = std::get<GruLayer>(layer);
            const auto h_dim = static_cast<Eigen::Index>(g.spec.hidden);
            g.inputs = current;
            g.h_prev.clear();
            g.r.clear();
            g.u.clear();
            g.c.clear();
            const Eigen::RowVectorXd br = g.b.leftCols(h_dim);
            const Eigen::RowVectorXd bu = g.b.middleCols(h_dim, h_dim);
            const Eigen::RowVectorXd bc = g.b.rightCols(h_dim);
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(batch, h_dim);
            Seq next;
            next.reserve(current.size());
            for (const auto& x : current) {
                g.h_prev.push_back(h);
                const Eigen::MatrixXd gates_x = x * g.wx;
                Eigen::MatrixXd a_r = gates_x.leftCols(h_dim) + h * g.wh.leftCols(h_dim);
                a_r.rowwise() += br;
                Eigen::MatrixXd a_u =
                    gates_x.middleCols(h_dim, h_dim) + h * g.wh.middleCols(h_dim, h_dim);
                a_u.rowwise() += bu;
                const Eigen::MatrixXd r = sigmoid(a_r);
                const Eigen::MatrixXd u = sigmoid(a_u);
                Eigen::MatrixXd a_c =
                    gates_x.rightCols(h_dim) + r.cwiseProduct(h) * g.wh.rightCols(h_dim);
                a_c.rowwise() += bc;
                const Eigen::MatrixXd c = a_c.array().tanh().matrix();
                h = u.cwiseProduct(h) +
                    (Eigen::MatrixXd::Ones(batch, h_dim) - u).cwiseProduct(c);
                g.r.push_back(r);
                g.u.push_back(u);
                g.c.push_back(c);
                next.push_back(h);
            }
            current = std::move(next);
        }
    }
    for (const auto& step : current) check_finite(step, "output");
    have_cache_ = true;
    return current;
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& input) {
    return forward_seq({input}).front();
}

Gradients Network::backward_seq(const Seq& loss_grad) {
    if (!have_cache_) {
        throw std::runtime_error("network: backward called before forward");
    }

    Gradients grads;
    Seq current = loss_grad;

    std::vector<std::vector<Eigen::MatrixXd>> per_layer(layers_.size());
    for (std::size_t li = layers_.size(); li-- > 0;) {
        auto& layer = layers_[li];
        if (std::holds_alternative<DenseLayer>(layer)) {
            auto& d = std::get<DenseLayer>(layer);
            if (current.size() != d.inputs.size()) {
                throw std::runtime_error("network: loss gradient length mismatch");
            }
            Eigen::MatrixXd dw = Eigen::MatrixXd::Zero(d.w.rows(), d.w.cols());
            Eigen::MatrixXd db = Eigen::MatrixXd::Zero(1, d.b.cols());
            Seq prev(current.size());
            for (std::size_t t = 0; t < current.size(); ++t) {
                const Eigen::MatrixXd dz = activation_grad(d.spec.act, d.pre_acts[t], current[t]);
                dw += d.inputs[t].transpose() * dz;
                db += dz.colwise().sum();
                prev[t] = dz * d.w.transpose();
            }
            per_layer[li] = {dw, db};
            current = std::move(prev);
        } else {
            auto& g = std::get<GruLayer>(layer);
            const auto h_dim = static_cast<Eigen::Index>(g.spec.hidden);
            const std::size_t steps = g.inputs.size();
            if (current.size() != steps) {
                throw std::runtime_error("network: loss gradient length mismatch");
            }
            Eigen::MatrixXd dwx = Eigen::MatrixXd::Zero(g.wx.rows(), g.wx.cols());
            Eigen::MatrixXd dwh = Eigen::MatrixXd::Zero(g.wh.rows(), g.wh.cols());
            Eigen::MatrixXd db = Eigen::MatrixXd::Zero(1, g.b.cols());
            Seq prev(steps);
            Eigen::MatrixXd dh_carry =
                Eigen::MatrixXd::Zero(current.front().rows(), h_dim);
            for (std::size_t t = steps; t-- > 0;) {
                const Eigen::MatrixXd dh = current[t] + dh_carry;
                const Eigen::MatrixXd& r = g.r[t];
                const Eigen::MatrixXd& u = g.u[t];
                const Eigen::MatrixXd& c = g.c[t];
                const Eigen::MatrixXd& hp = g.h_prev[t];

                const Eigen::MatrixXd dc = (dh.array() * (1.0 - u.array())).matrix();
                const Eigen::MatrixXd du = dh.cwiseProduct(hp - c);
                const Eigen::MatrixXd da_c = (dc.array() * (1.0 - c.array().square())).matrix();
                const Eigen::MatrixXd da_u =
                    (du.array() * u.array() * (1.0 - u.array())).matrix();

                const Eigen::MatrixXd d_rh = da_c * g.wh.rightCols(h_dim).transpose();
                const Eigen::MatrixXd dr = d_rh.cwiseProduct(hp);
                const Eigen::MatrixXd da_r =
                    (dr.array() * r.array() * (1.0 - r.array())).matrix();

                dh_carry = dh.cwiseProduct(u) + d_rh.cwiseProduct(r) +
                           da_r * g.wh.leftCols(h_dim).transpose() +
                           da_u * g.wh.middleCols(h_dim, h_dim).transpose();

                prev[t] = da_r * g.wx.leftCols(h_dim).transpose() +
                          da_u * g.wx.middleCols(h_dim, h_dim).transpose() +
                          da_c * g.wx.rightCols(h_dim).transpose();

                dwx.leftCols(h_dim) += g.inputs[t].transpose() * da_r;
                dwx.middleCols(h_dim, h_dim) += g.inputs[t].transpose() * da_u;
                dwx.rightCols(h_dim) += g.inputs[t].transpose() * da_c;
                dwh.leftCols(h_dim) += hp.transpose() * da_r;
                dwh.middleCols(h_dim, h_dim) += hp.transpose() * da_u;
                dwh.rightCols(h_dim) += r.cwiseProduct(hp).transpose() * da_c;
                db.leftCols(h_dim) += da_r.colwise().sum();
                db.middleCols(h_dim, h_dim) += da_u.colwise().sum();
                db.rightCols(h_dim) += da_c.colwise().sum();
            }
            per_layer[li] = {dwx, dwh, db};
            current = std::move(prev);
        }
    }

    for (auto& layer_grads : per_layer) {
        for (auto& gmat : layer_grads) grads.by_param.push_back(std::move(gmat));
    }
    grads.wrt_input = std::move(current);
    return grads;
}

Gradients Network::backward(const Eigen::MatrixXd& loss_grad) {
    return backward_seq({loss_grad});
}

std::vector<Eigen::MatrixXd*> Network::params() {
    std::vector<Eigen::MatrixXd*> out;
    for (auto& layer : layers_) {
        if (std::holds_alternative<DenseLayer>(layer)) {
            auto& d = std::get<DenseLayer>(layer);
            out.push_back(&d.w);
            out.push_back(&d.b);
        } else {
            auto& g = std::get<GruLayer>(layer);
            out.push_back(&g.wx);
            out.push_back(&g.wh);
            out.push_back(&g.b);
        }
    }
    return out;
}

std::vector<const Eigen::MatrixXd*> Network::params() const {
    std::vector<const Eigen::MatrixXd*> out;
    for (const auto& layer : layers_) {
        if (std::holds_alternative<DenseLayer>(layer)) {
            const auto& d = std::get<DenseLayer>(layer);
            out.push_back(&d.w);
            out.push_back(&d.b);
        } else {
            const auto& g = std::get<GruLayer>(layer);
            out.push_back(&g.wx);
            out.push_back(&g.wh);
            out.push_back(&g.b);
        }
    }
    return out;
}

std::vector<Tensor> Network::weights() const {
    std::vector<Tensor> out;
    for (const auto* p : params()) out.push_back(Tensor::from_matrix(*p));
    return out;
}

void Network::set_weights(const std::vector<Tensor>& weights) {
    auto targets = params();
    if (weights.size() != targets.size()) {
        throw std::runtime_error("network: weight tensor count mismatch");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const Eigen::MatrixXd m = weights[i].matrix();
        if (m.rows() != targets[i]->rows() || m.cols() != targets[i]->cols()) {
            throw std::runtime_error("network: weight tensor shape mismatch");
        }
        *targets[i] = m;
    }
}

}  // namespace causalsynth
