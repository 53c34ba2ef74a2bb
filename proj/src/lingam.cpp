#include "causalsynth/lingam.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace causalsynth {

namespace {

constexpr double kOrderTieTolerance = 1e-6;

std::vector<std::size_t> identity_permutation(std::size_t k) {
    std::vector<std::size_t> p(k);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

/// Assigns ICA rows to variables so the diagonal dominates, minimizing
/// sum(1/|w_ii|). Exhaustive for K <= 7 (guaranteed optimum), greedy beyond.
std::vector<std::size_t> dominant_diagonal_assignment(const Eigen::MatrixXd& w) {
    const std::size_t k = static_cast<std::size_t>(w.rows());
    const auto cost_of = [&](const std::vector<std::size_t>& rows) {
        double cost = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double denom = std::abs(w(static_cast<Eigen::Index>(rows[i]),
                                            static_cast<Eigen::Index>(i)));
            cost += 1.0 / std::max(denom, 1e-12);
        }
        return cost;
    };

    if (k <= 7) {
        std::vector<std::size_t> perm = identity_permutation(k);
        std::vector<std::size_t> best = perm;
        double best_cost = cost_of(perm);
        while (std::next_permutation(perm.begin(), perm.end())) {
            const double cost = cost_of(perm);
            if (cost < best_cost) {
                best_cost = cost;
                best = perm;
            }
        }
        return best;
    }

    // Greedy fallback: repeatedly take the largest remaining |w| entry.
    std::vector<std::size_t> rows(k, k);
    std::vector<bool> row_used(k, false), col_used(k, false);
    for (std::size_t step = 0; step < k; ++step) {
        double best_val = -1.0;
        std::size_t br = 0, bc = 0;
        for (std::size_t r = 0; r < k; ++r) {
            if (row_used[r]) continue;
            for (std::size_t c = 0; c < k; ++c) {
                if (col_used[c]) continue;
                const double v = std::abs(w(static_cast<Eigen::Index>(r),
                                            static_cast<Eigen::Index>(c)));
                if (v > best_val) {
                    best_val = v;
                    br = r;
                    bc = c;
                }
            }
        }
        rows[bc] = br;
        row_used[br] = true;
        col_used[bc] = true;
    }
    return rows;
}

double upper_triangle_mass(const Eigen::MatrixXd& b, const std::vector<std::size_t>& order) {
    // order[position] = variable; entry (child, parent) is nonzero only when
    // the parent precedes the child, so everything on or above the diagonal
    // of the reordered matrix should vanish.
    double mass = 0.0;
    const std::size_t k = order.size();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            const double v = b(static_cast<Eigen::Index>(order[i]),
                               static_cast<Eigen::Index>(order[j]));
            mass += v * v;
        }
    }
    return mass;
}

struct OrderSearch {
    std::vector<std::size_t> best;
    std::vector<std::size_t> runner_up;
    double best_mass = 0.0;
    double runner_up_mass = 0.0;
    bool ambiguous = false;
};

OrderSearch find_causal_order(const Eigen::MatrixXd& b) {
    const std::size_t k = static_cast<std::size_t>(b.rows());
    if (k > 7) throw std::runtime_error("lingam: causal-order search limited to K <= 7");

    OrderSearch out;
    std::vector<std::size_t> perm = identity_permutation(k);
    out.best = perm;
    out.best_mass = upper_triangle_mass(b, perm);
    out.runner_up_mass = std::numeric_limits<double>::infinity();
    while (std::next_permutation(perm.begin(), perm.end())) {
        const double mass = upper_triangle_mass(b, perm);
        if (mass < out.best_mass) {
            out.runner_up = out.best;
            out.runner_up_mass = out.best_mass;
            out.best = perm;
            out.best_mass = mass;
        } else if (mass < out.runner_up_mass) {
            out.runner_up = perm;
            out.runner_up_mass = mass;
        }
    }
    // next_permutation enumerates lexicographically and strict `<` keeps the
    // earliest optimum, so exact ties already resolve lexicographically.
    out.ambiguous = std::isfinite(out.runner_up_mass) &&
                    out.runner_up_mass - out.best_mass < kOrderTieTolerance;
    return out;
}

std::string order_to_string(const std::vector<std::string>& names,
                            const std::vector<std::size_t>& order) {
    std::ostringstream os;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) os << " -> ";
        os << names[order[i]];
    }
    return os.str();
}

/// Sequential least squares along the causal order: each variable regressed
/// on all of its predecessors (columns centered, no intercept).
Eigen::MatrixXd reestimate_by_regression(const Eigen::MatrixXd& centered,
                                         const std::vector<std::size_t>& order) {
    const std::size_t k = order.size();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                              static_cast<Eigen::Index>(k));
    for (std::size_t pos = 1; pos < k; ++pos) {
        const auto child = static_cast<Eigen::Index>(order[pos]);
        Eigen::MatrixXd x(centered.rows(), static_cast<Eigen::Index>(pos));
        for (std::size_t j = 0; j < pos; ++j) {
            x.col(static_cast<Eigen::Index>(j)) =
                centered.col(static_cast<Eigen::Index>(order[j]));
        }
        const Eigen::VectorXd coef = x.colPivHouseholderQr().solve(centered.col(child));
        for (std::size_t j = 0; j < pos; ++j) {
            b(child, static_cast<Eigen::Index>(order[j])) = coef(static_cast<Eigen::Index>(j));
        }
    }
    return b;
}

LingamResult lingam_fit_matrix(const Eigen::MatrixXd& values,
                               const std::vector<std::string>& columns, double prune_threshold,
                               std::uint64_t seed) {
    const std::size_t k = columns.size();
    LingamResult out;
    out.ica = fastica(values, seed);
    if (!out.ica.identifiable) {
        out.warnings.push_back("sources look Gaussian; the unmixing rotation is not identifiable");
    }

    // Row assignment and unit-diagonal scaling: W' ~ I - B.
    const std::vector<std::size_t> rows = dominant_diagonal_assignment(out.ica.unmixing);
    Eigen::MatrixXd w_perm(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        w_perm.row(static_cast<Eigen::Index>(i)) =
            out.ica.unmixing.row(static_cast<Eigen::Index>(rows[i]));
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double d = w_perm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        if (std::abs(d) < 1e-12) throw std::runtime_error("lingam: zero diagonal after matching");
        w_perm.row(static_cast<Eigen::Index>(i)) /= d;
    }
    const Eigen::MatrixXd b_ica =
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) -
        w_perm;

    const OrderSearch search = find_causal_order(b_ica);
    if (search.ambiguous) {
        out.warnings.push_back("causal order ambiguous; kept " +
                               order_to_string(columns, search.best) + ", runner-up " +
                               order_to_string(columns, search.runner_up));
    }
    out.causal_order = search.best;

    Eigen::MatrixXd centered = values;
    centered.rowwise() -= values.colwise().mean();
    out.b_matrix = reestimate_by_regression(centered, out.causal_order);

    out.pruned_graph.nodes = columns;
    for (std::size_t child = 0; child < k; ++child) {
        for (std::size_t parent = 0; parent < k; ++parent) {
            const double w = out.b_matrix(static_cast<Eigen::Index>(child),
                                          static_cast<Eigen::Index>(parent));
            if (std::abs(w) >= prune_threshold) {
                out.pruned_graph.edges.push_back({columns[parent], columns[child], w});
            }
        }
    }
    return out;
}

}  // namespace

LingamResult lingam_fit(const PanelDataset& data, double prune_threshold, std::uint64_t seed) {
    data.validate();
    return lingam_fit_matrix(data.values, data.columns, prune_threshold, seed);
}

VarLingamResult var_lingam_fit(const PanelDataset& data, std::size_t max_lag,
                               double prune_threshold, std::uint64_t seed) {
    data.validate();
    if (!data.time_indexed) throw std::runtime_error("var_lingam_fit: data must be time-indexed");
    if (max_lag != 1) throw std::runtime_error("var_lingam_fit: only lag 1 is supported");

    const auto k = static_cast<Eigen::Index>(data.cols());
    const auto t_rows = static_cast<Eigen::Index>(data.rows());

    std::vector<bool> boundary(static_cast<std::size_t>(t_rows), false);
    for (std::size_t s : data.window_starts) boundary[s] = true;
    std::vector<Eigen::Index> usable;
    for (Eigen::Index t = 1; t < t_rows; ++t) {
        if (!boundary[static_cast<std::size_t>(t)]) usable.push_back(t);
    }
    const auto n = static_cast<Eigen::Index>(usable.size());
    if (n < 10 * k) throw std::runtime_error("var_lingam_fit: not enough rows");

    Eigen::MatrixXd centered = data.values;
    centered.rowwise() -= data.values.colwise().mean();

    // Stage 1: least-squares autoregression x_t = M x_{t-1} + u.
    Eigen::MatrixXd lagged(n, k), current(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        lagged.row(i) = centered.row(usable[static_cast<std::size_t>(i)] - 1);
        current.row(i) = centered.row(usable[static_cast<std::size_t>(i)]);
    }
    const Eigen::MatrixXd m_coef =
        lagged.colPivHouseholderQr().solve(current).transpose();  // K x K, row = target
    const Eigen::MatrixXd residuals = current - lagged * m_coef.transpose();

    // Stage 2: contemporaneous structure from the residuals.
    VarLingamResult out;
    out.contemporaneous = lingam_fit_matrix(residuals, data.columns, prune_threshold, seed);

    // Structural lag effects: B_tau = (I - B0) M_tau.
    const Eigen::MatrixXd b1 =
        (Eigen::MatrixXd::Identity(k, k) - out.contemporaneous.b_matrix) * m_coef;
    out.lag_matrices.push_back(b1);

    out.lagged_graph.nodes = data.columns;
    for (const auto& name : data.columns) out.lagged_graph.nodes.push_back(name + "[t-1]");
    for (Eigen::Index child = 0; child < k; ++child) {
        for (Eigen::Index parent = 0; parent < k; ++parent) {
            const double w = b1(child, parent);
            if (std::abs(w) >= prune_threshold) {
                out.lagged_graph.edges.push_back(
                    {data.columns[static_cast<std::size_t>(parent)] + "[t-1]",
                     data.columns[static_cast<std::size_t>(child)], w});
            }
        }
    }
    return out;
}

GraphComparison compare_graphs(const WeightedDag& found, const WeightedDag& truth) {
    std::vector<std::string> sorted_found = found.nodes;
    std::vector<std::string> sorted_truth = truth.nodes;
    std::sort(sorted_found.begin(), sorted_found.end());
    std::sort(sorted_truth.begin(), sorted_truth.end());
    if (sorted_found != sorted_truth) {
        throw std::runtime_error("compare_graphs: node sets differ");
    }

    GraphComparison cmp;
    for (const auto& te : truth.edges) {
        GraphComparison::EdgeCheck check;
        check.from = te.from;
        check.to = te.to;
        check.true_weight = te.weight;
        if (const auto w = found.weight_of(te.from, te.to)) {
            check.found_weight = *w;
        } else if (const auto rw = found.weight_of(te.to, te.from)) {
            check.found_weight = *rw;
            check.reversed = true;
            ++cmp.reversed_count;
        } else {
            check.missing = true;
            ++cmp.missing_count;
        }
        cmp.true_edges.push_back(check);
    }
    for (const auto& fe : found.edges) {
        const bool matches_true = truth.has_edge(fe.from, fe.to);
        const bool reverses_true = truth.has_edge(fe.to, fe.from);
        if (!matches_true && !reverses_true) cmp.spurious_edges.push_back(fe);
    }
    return cmp;
}

std::string comparison_to_json(const GraphComparison& cmp) {
    nlohmann::json j;
    j["true_edges"] = nlohmann::json::array();
    for (const auto& e : cmp.true_edges) {
        j["true_edges"].push_back({{"from", e.from},
                                   {"to", e.to},
                                   {"true_weight", e.true_weight},
                                   {"found_weight", e.found_weight},
                                   {"missing", e.missing},
                                   {"reversed", e.reversed}});
    }
    j["spurious_edges"] = nlohmann::json::array();
    for (const auto& e : cmp.spurious_edges) {
        j["spurious_edges"].push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    }
    j["missing_count"] = cmp.missing_count;
    j["reversed_count"] = cmp.reversed_count;
    return j.dump(2);
}

std::string comparison_to_text(const GraphComparison& cmp) {
    std::ostringstream os;
    os << "causal effect         truth     found\n";
    const auto line = [&os](const std::string& from, const std::string& to, double tw,
                            const std::string& fw, const std::string& note) {
        std::string label = from + " -> " + to;
        label.resize(std::max<std::size_t>(label.size(), 22), ' ');
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%-10.2f", tw);
        os << label << buf << fw;
        if (!note.empty()) os << "  [" << note << "]";
        os << '\n';
    };
    for (const auto& e : cmp.true_edges) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", e.found_weight);
        std::string note;
        if (e.missing) note = "missing";
        if (e.reversed) note = "reversed";
        line(e.from, e.to, e.true_weight, e.missing ? "0" : buf, note);
    }
    for (const auto& e : cmp.spurious_edges) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", e.weight);
        line(e.from, e.to, 0.0, buf, "spurious");
    }
    return os.str();
}

}  // namespace causalsynth
