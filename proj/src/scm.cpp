#include "causalsynth/scm.hpp"

#include "causalsynth/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace causalsynth {

double NoiseSpec::sd() const {
    if (kind == Kind::Gaussian) return b;
    return (b - a) / std::sqrt(12.0);
}

WeightedDag ScmSpec::contemporaneous_graph() const {
    WeightedDag dag;
    dag.nodes = variables;
    for (std::size_t v = 0; v < variables.size(); ++v) {
        for (const auto& term : equations[v]) {
            if (term.lag == 0) {
                dag.edges.push_back({term.parent, variables[v], term.coefficient});
            }
        }
    }
    return dag;
}

void ScmSpec::validate() const {
    if (variables.empty()) throw std::runtime_error("ScmSpec: no variables");
    if (equations.size() != variables.size() || noise.size() != variables.size()) {
        throw std::runtime_error("ScmSpec: equations/noise count must match variables");
    }
    for (std::size_t v = 0; v < variables.size(); ++v) {
        for (const auto& term : equations[v]) {
            bool declared = false;
            for (const auto& name : variables) {
                if (name == term.parent) declared = true;
            }
            if (!declared) {
                throw std::runtime_error("ScmSpec: undeclared parent '" + term.parent + "'");
            }
            if (term.lag != 0 && term.lag != 1) {
                throw std::runtime_error("ScmSpec: only lags 0 and 1 are supported");
            }
            if (stationary && term.lag == 1 && term.parent == variables[v] &&
                std::abs(term.coefficient) >= 1.0) {
                throw std::runtime_error("ScmSpec: |self-lag| must be < 1 for a stationary spec");
            }
        }
    }
    if (!contemporaneous_graph().acyclic()) {
        throw std::runtime_error("ScmSpec: contemporaneous dependencies form a cycle");
    }
}

ScmSpec model_a(const NoiseSpec& noise) {
    ScmSpec spec;
    spec.name = "model_a";
    spec.variables = {"z1", "z2", "x1", "x2", "y"};
    spec.equations = {
        {},                                              // z1 = e
        {},                                              // z2 = e
        {{"z1", 0, 1.0}, {"z2", 0, 1.0}},                // x1 = b3 z1 + b4 z2 + e
        {{"z2", 0, 1.0}},                                // x2 = b5 z2 + e
        {{"y", 1, 0.5}, {"x1", 0, 1.0}, {"x2", 0, 1.0}}, // y = a y_{t-1} + b1 x1 + b2 x2 + e
    };
    spec.noise = {noise, noise, noise, noise, noise};
    spec.burn_in = 100;
    spec.stationary = true;
    spec.validate();
    return spec;
}

ScmSpec model_b(const NoiseSpec& noise) {
    ScmSpec spec = model_a(noise);
    spec.name = "model_b";
    spec.equations[0] = {{"z1", 1, 1.0}};
    spec.equations[1] = {{"z2", 1, 1.0}};
    spec.burn_in = 0;       // random walks have no stationary law; paths start at 0
    spec.stationary = false;
    spec.validate();
    return spec;
}

SampleWithNoise sample_with_noise(const ScmSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::runtime_error("sample: n must be >= 1");
    spec.validate();
    const auto order = spec.contemporaneous_graph().topological_order();
    if (!order) throw std::runtime_error("sample: cyclic contemporaneous graph");

    const std::size_t k = spec.variables.size();
    Rng rng(seed);

    struct ResolvedTerm {
        std::size_t parent;
        int lag;
        double coefficient;
    };
    std::vector<std::vector<ResolvedTerm>> terms(k);
    {
        const WeightedDag dag = spec.contemporaneous_graph();
        for (std::size_t v = 0; v < k; ++v) {
            for (const auto& term : spec.equations[v]) {
                terms[v].push_back({dag.node_index(term.parent), term.lag, term.coefficient});
            }
        }
    }

    Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    Eigen::MatrixXd noise(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));

    std::vector<double> prev(k, 0.0), cur(k, 0.0);
    std::vector<double> eps(k, 0.0);
    const std::size_t total = spec.burn_in + n;
    for (std::size_t t = 0; t < total; ++t) {
        for (std::size_t pos = 0; pos < k; ++pos) {
            const std::size_t v = (*order)[pos];
            const NoiseSpec& ns = spec.noise[v];
            const double e = ns.kind == NoiseSpec::Kind::Gaussian ? rng.gaussian(ns.a, ns.b)
                                                                  : rng.uniform(ns.a, ns.b);
            double value = e;
            for (const auto& term : terms[v]) {
                value += term.coefficient * (term.lag == 0 ? cur[term.parent] : prev[term.parent]);
            }
            cur[v] = value;
            eps[v] = e;
        }
        if (t >= spec.burn_in) {
            const auto row = static_cast<Eigen::Index>(t - spec.burn_in);
            for (std::size_t v = 0; v < k; ++v) {
                data(row, static_cast<Eigen::Index>(v)) = cur[v];
                noise(row, static_cast<Eigen::Index>(v)) = eps[v];
            }
        }
        prev = cur;
    }

    SampleWithNoise out;
    out.data.columns = spec.variables;
    out.data.values = std::move(data);
    out.data.time_indexed = true;
    out.noise.columns = spec.variables;
    out.noise.values = std::move(noise);
    out.noise.time_indexed = true;
    return out;
}

PanelDataset sample(const ScmSpec& spec, std::size_t n, std::uint64_t seed) {
    return sample_with_noise(spec, n, seed).data;
}

TrueParams ground_truth(const ScmSpec& spec) {
    if (spec.name != "model_a" && spec.name != "model_b") {
        throw std::runtime_error("ground_truth: unknown spec shape '" + spec.name + "'");
    }
    TrueParams params;
    const auto coef = [&](const std::string& var, const std::string& parent, int lag) {
        const std::size_t v = spec.contemporaneous_graph().node_index(var);
        for (const auto& term : spec.equations[v]) {
            if (term.parent == parent && term.lag == lag) return term.coefficient;
        }
        throw std::runtime_error("ground_truth: missing term " + parent + " -> " + var);
    };
    params.alpha = coef("y", "y", 1);
    params.betas = {coef("y", "x1", 0), coef("y", "x2", 0), coef("x1", "z1", 0),
                    coef("x1", "z2", 0), coef("x2", "z2", 0)};
    for (const auto& ns : spec.noise) params.noise_sd.push_back(ns.sd());
    return params;
}

WeightedDag true_graph(const ScmSpec& spec) {
    return spec.contemporaneous_graph();
}

}  // namespace causalsynth
