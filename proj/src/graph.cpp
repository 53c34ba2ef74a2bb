#include "causalsynth/graph.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace causalsynth {

std::size_t WeightedDag::node_index(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == name) return i;
    }
    throw std::runtime_error("WeightedDag: unknown node '" + name + "'");
}

bool WeightedDag::has_edge(const std::string& from, const std::string& to) const {
    for (const auto& e : edges) {
        if (e.from == from && e.to == to) return true;
    }
    return false;
}

std::optional<double> WeightedDag::weight_of(const std::string& from, const std::string& to) const {
    for (const auto& e : edges) {
        if (e.from == from && e.to == to) return e.weight;
    }
    return std::nullopt;
}

std::vector<std::size_t> WeightedDag::parents_of(std::size_t node) const {
    std::vector<std::size_t> out;
    for (const auto& e : edges) {
        if (node_index(e.to) == node) out.push_back(node_index(e.from));
    }
    return out;
}

std::optional<std::vector<std::size_t>> WeightedDag::topological_order() const {
    const std::size_t n = nodes.size();
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<std::size_t>> children(n);
    for (const auto& e : edges) {
        const std::size_t u = node_index(e.from);
        const std::size_t v = node_index(e.to);
        children[u].push_back(v);
        ++indegree[v];
    }

    std::vector<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) frontier.push_back(i);
    }

    std::vector<std::size_t> order;
    order.reserve(n);
    // Pop smallest index first so the order is stable across runs.
    while (!frontier.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < frontier.size(); ++i) {
            if (frontier[i] < frontier[best]) best = i;
        }
        const std::size_t u = frontier[best];
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(best));
        order.push_back(u);
        for (std::size_t v : children[u]) {
            if (--indegree[v] == 0) frontier.push_back(v);
        }
    }
    if (order.size() != n) return std::nullopt;
    return order;
}

std::string dag_to_json(const WeightedDag& dag) {
    nlohmann::json j;
    j["nodes"] = dag.nodes;
    j["edges"] = nlohmann::json::array();
    for (const auto& e : dag.edges) {
        j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    }
    return j.dump(2);
}

WeightedDag dag_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    WeightedDag dag;
    dag.nodes = j.at("nodes").get<std::vector<std::string>>();
    for (const auto& je : j.at("edges")) {
        dag.edges.push_back({je.at("from").get<std::string>(), je.at("to").get<std::string>(),
                             je.at("weight").get<double>()});
    }
    for (const auto& e : dag.edges) {
        dag.node_index(e.from);
        dag.node_index(e.to);
    }
    return dag;
}

void write_dag(const WeightedDag& dag, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << dag_to_json(dag) << '\n';
}

WeightedDag read_dag(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return dag_from_json(text);
}

}  // namespace causalsynth
