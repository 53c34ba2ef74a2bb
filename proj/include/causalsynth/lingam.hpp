#pragma once

#include "causalsynth/graph.hpp"
#include "causalsynth/ica.hpp"
#include "causalsynth/panel.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace causalsynth {

struct LingamResult {
    /// Connection strengths; entry (i, j) is the effect of variable j on
    /// variable i. Strictly lower triangular once rows/columns are permuted
    /// by causal_order.
    Eigen::MatrixXd b_matrix;
    std::vector<std::size_t> causal_order;
    WeightedDag pruned_graph;
    IcaResult ica;
    std::vector<std::string> warnings;
};

struct VarLingamResult {
    LingamResult contemporaneous;
    /// One structural lag matrix per lag; entry (i, j) is the lagged effect
    /// of variable j on variable i.
    std::vector<Eigen::MatrixXd> lag_matrices;
    WeightedDag lagged_graph;  // edges labelled "<name>[t-1]" -> "<name>"
};

/// ICA-LiNGAM: unmix, permute rows to a dominant diagonal (exhaustively for
/// K <= 7), normalize, locate the causal order that makes I - W lower
/// triangular, re-estimate connection strengths by sequential least squares
/// along that order, and prune entries below the threshold.
LingamResult lingam_fit(const PanelDataset& data, double prune_threshold,
                        std::uint64_t seed = 1);

/// Two-stage time-series variant: a least-squares autoregression removes
/// lag-1 influence, lingam_fit runs on the residuals, and structural lag
/// matrices are recovered as (I - B0) * M_tau.
VarLingamResult var_lingam_fit(const PanelDataset& data, std::size_t max_lag,
                               double prune_threshold, std::uint64_t seed = 1);

struct GraphComparison {
    struct EdgeCheck {
        std::string from;
        std::string to;
        double true_weight = 0.0;
        double found_weight = 0.0;
        bool missing = false;
        bool reversed = false;
    };
    std::vector<EdgeCheck> true_edges;
    std::vector<WeightedDag::Edge> spurious_edges;
    std::size_t missing_count = 0;
    std::size_t reversed_count = 0;
};

/// Edge-by-edge comparison of a discovered graph against the ground truth.
GraphComparison compare_graphs(const WeightedDag& found, const WeightedDag& truth);

std::string comparison_to_json(const GraphComparison& cmp);
std::string comparison_to_text(const GraphComparison& cmp);

}  // namespace causalsynth
