#pragma once

#include <optional>
#include <string>
#include <vector>

namespace causalsynth {

/// Variable-indexed weighted adjacency. Carries both discovery output (with
/// connection strengths) and the structure handed to the causal generator
/// (which ignores the weights).
struct WeightedDag {
    struct Edge {
        std::string from;
        std::string to;
        double weight = 0.0;
    };

    std::vector<std::string> nodes;
    std::vector<Edge> edges;

    std::size_t node_index(const std::string& name) const;
    bool has_edge(const std::string& from, const std::string& to) const;
    std::optional<double> weight_of(const std::string& from, const std::string& to) const;
    std::vector<std::size_t> parents_of(std::size_t node) const;

    /// Kahn's algorithm; nullopt when the graph has a cycle.
    std::optional<std::vector<std::size_t>> topological_order() const;

    bool acyclic() const { return topological_order().has_value(); }
};

std::string dag_to_json(const WeightedDag& dag);
WeightedDag dag_from_json(const std::string& text);
void write_dag(const WeightedDag& dag, const std::string& path);
WeightedDag read_dag(const std::string& path);

}  // namespace causalsynth
