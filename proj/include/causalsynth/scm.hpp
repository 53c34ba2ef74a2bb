#pragma once

#include "causalsynth/graph.hpp"
#include "causalsynth/panel.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace causalsynth {

struct NoiseSpec {
    enum class Kind { Gaussian, Uniform };
    Kind kind = Kind::Gaussian;
    double a = 0.0;  // mean | lo
    double b = 1.0;  // sd   | hi

    static NoiseSpec gaussian(double mean, double sd) { return {Kind::Gaussian, mean, sd}; }
    static NoiseSpec uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }

    double sd() const;
    double variance() const { return sd() * sd(); }
};

/// Declarative structural causal model: one linear equation per variable with
/// lag-0 / lag-1 parent terms plus an exogenous noise draw.
struct ScmSpec {
    struct Term {
        std::string parent;
        int lag = 0;  // 0 = contemporaneous, 1 = previous step
        double coefficient = 0.0;
    };

    std::string name = "custom";
    std::vector<std::string> variables;
    std::vector<std::vector<Term>> equations;  // one list per variable
    std::vector<NoiseSpec> noise;              // one per variable
    std::size_t burn_in = 0;
    bool stationary = true;

    /// Contemporaneous (lag-0) dependency graph; must be acyclic.
    WeightedDag contemporaneous_graph() const;

    /// Checks the declared invariants: parents declared, lag-0 DAG, and
    /// |self-lag| < 1 when flagged stationary.
    void validate() const;
};

struct TrueParams {
    double alpha = 0.0;
    std::array<double, 5> betas = {};
    std::vector<double> noise_sd;  // per equation
};

struct SampleWithNoise {
    PanelDataset data;
    PanelDataset noise;  // same shape; exogenous draw per variable per step
};

/// y_t = a*y_{t-1} + b1*x1 + b2*x2 + e; x1 = b3*z1 + b4*z2 + e; x2 = b5*z2 + e;
/// z1 = e; z2 = e. Coefficients a=0.5, b1..b5=1.
ScmSpec model_a(const NoiseSpec& noise);

/// Model A plus unit-root self-lags on z1 and z2; flagged nonstationary.
ScmSpec model_b(const NoiseSpec& noise = NoiseSpec::gaussian(0.0, 0.5));

PanelDataset sample(const ScmSpec& spec, std::size_t n, std::uint64_t seed);
SampleWithNoise sample_with_noise(const ScmSpec& spec, std::size_t n, std::uint64_t seed);

TrueParams ground_truth(const ScmSpec& spec);

/// The reference five-variable graph with the configured coefficients as edge
/// weights (contemporaneous part only).
WeightedDag true_graph(const ScmSpec& spec);

}  // namespace causalsynth
