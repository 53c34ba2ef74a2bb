#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causalsynth/ica.hpp"
#include "causalsynth/lingam.hpp"
#include "causalsynth/rng.hpp"
#include "causalsynth/scm.hpp"
#include "test_util.hpp"

using namespace causalsynth;

namespace {

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
    }
    return m;
}

PanelDataset panel_from(const Eigen::MatrixXd& values, const std::vector<std::string>& cols,
                        bool time_indexed = true) {
    PanelDataset d;
    d.columns = cols;
    d.values = values;
    d.time_indexed = time_indexed;
    return d;
}

}  // namespace

TEST_CASE("independent uniform columns need no unmixing") {
    const Eigen::MatrixXd x = uniform_matrix(8000, 3, 42);
    const IcaResult r = fastica(x, 7);
    CHECK(r.identifiable);

    // W * mixing should be a signed permutation of the identity; with an
    // identity mixing, normalize each row by its largest entry and check the
    // off-pattern mass. Rows act on whitened-but-nearly-original axes, so
    // compare through the source correlation instead: every source should
    // align with exactly one input column.
    for (Eigen::Index s = 0; s < 3; ++s) {
        int strong = 0;
        for (Eigen::Index c = 0; c < 3; ++c) {
            const double corr =
                std::abs(testutil::correlation(r.sources.col(s), x.col(c)));
            if (corr > 0.95) ++strong;
            else CHECK(corr < 0.1);
        }
        CHECK(strong == 1);
    }
}

TEST_CASE("known 2x2 mixing is undone up to sign and permutation") {
    const Eigen::MatrixXd s = uniform_matrix(10000, 2, 77);
    Eigen::MatrixXd mixing(2, 2);
    mixing << 1.0, 0.5, 0.2, 1.0;
    const Eigen::MatrixXd x = s * mixing.transpose();

    const IcaResult r = fastica(x, 3);
    // Each true source must correlate > 0.95 with exactly one recovered one.
    for (Eigen::Index true_idx = 0; true_idx < 2; ++true_idx) {
        double best = 0.0;
        for (Eigen::Index rec = 0; rec < 2; ++rec) {
            best = std::max(best,
                            std::abs(testutil::correlation(s.col(true_idx), r.sources.col(rec))));
        }
        CHECK(best > 0.95);
    }
}

TEST_CASE("unmixing rows are unit norm in whitened coordinates") {
    const Eigen::MatrixXd x = uniform_matrix(5000, 4, 5);
    const IcaResult r = fastica(x, 9);
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(r.unmixing_whitened.row(i).norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Sources pairwise uncorrelated.
    for (Eigen::Index a = 0; a < 4; ++a) {
        for (Eigen::Index b = a + 1; b < 4; ++b) {
            CHECK(std::abs(testutil::correlation(r.sources.col(a), r.sources.col(b))) < 0.05);
        }
    }
}

TEST_CASE("gaussian inputs are flagged as non-identifiable") {
    Rng rng(11);
    Eigen::MatrixXd x(8000, 3);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < 3; ++c) x(r, c) = rng.gaussian(0.0, 1.0);
    }
    try {
        const IcaResult r = fastica(x, 21);
        CHECK_FALSE(r.identifiable);
    } catch (const std::runtime_error&) {
        // Non-convergence is the other acceptable outcome under Gaussianity.
        CHECK(true);
    }
}

TEST_CASE("fastica is deterministic per seed") {
    const Eigen::MatrixXd x = uniform_matrix(3000, 3, 15);
    const IcaResult a = fastica(x, 4);
    const IcaResult b = fastica(x, 4);
    CHECK(a.unmixing == b.unmixing);
    CHECK(a.convergence_iters == b.convergence_iters);
}

TEST_CASE("two-variable chain is recovered with its weight") {
    // x2 = 1.5 * x1 + e, uniform noise, n = 10000; oracle tolerance 0.1.
    Rng rng(19);
    Eigen::MatrixXd v(10000, 2);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        v(i, 0) = rng.uniform(-1.0, 1.0);
        v(i, 1) = 1.5 * v(i, 0) + rng.uniform(-1.0, 1.0);
    }
    const LingamResult r = lingam_fit(panel_from(v, {"x1", "x2"}), 0.1, 2);
    REQUIRE(r.pruned_graph.edges.size() == 1);
    CHECK(r.pruned_graph.edges[0].from == "x1");
    CHECK(r.pruned_graph.edges[0].to == "x2");
    CHECK(r.pruned_graph.edges[0].weight == doctest::Approx(1.5).epsilon(0.07));
}

TEST_CASE("edgeless uniform data yields an empty graph") {
    const Eigen::MatrixXd x = uniform_matrix(10000, 3, 23);
    const LingamResult r = lingam_fit(panel_from(x, {"a", "b", "c"}), 0.1, 6);
    CHECK(r.pruned_graph.edges.empty());
}

TEST_CASE("model A with uniform noise gives exactly the five true edges") {
    const PanelDataset d = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 10000, 101);
    const LingamResult r = lingam_fit(d, 0.1, 55);

    REQUIRE(r.pruned_graph.edges.size() == 5);
    const std::vector<std::tuple<std::string, std::string>> expected = {
        {"z1", "x1"}, {"z2", "x1"}, {"z2", "x2"}, {"x1", "y"}, {"x2", "y"}};
    for (const auto& [from, to] : expected) {
        const auto w = r.pruned_graph.weight_of(from, to);
        REQUIRE(w.has_value());
        CHECK(*w == doctest::Approx(1.0).epsilon(0.1));
    }
}

TEST_CASE("b_matrix is strictly lower triangular under the causal order") {
    const PanelDataset d = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 10000, 31);
    const double threshold = 0.1;
    const LingamResult r = lingam_fit(d, threshold, 8);
    const std::size_t k = r.causal_order.size();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            const double v = r.b_matrix(static_cast<Eigen::Index>(r.causal_order[i]),
                                        static_cast<Eigen::Index>(r.causal_order[j]));
            CHECK(std::abs(v) < threshold);
        }
    }
    CHECK(r.pruned_graph.acyclic());
}

TEST_CASE("fitted B and residuals reconstruct the data") {
    const PanelDataset d = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 5000, 67);
    const LingamResult r = lingam_fit(d, 0.1, 12);
    Eigen::MatrixXd centered = d.values;
    centered.rowwise() -= d.values.colwise().mean();
    const Eigen::MatrixXd e = centered - centered * r.b_matrix.transpose();
    const Eigen::MatrixXd rebuilt = centered * r.b_matrix.transpose() + e;
    CHECK((rebuilt - centered).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("column scaling preserves the discovered edge set") {
    const PanelDataset d = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 10000, 83);
    const LingamResult base = lingam_fit(d, 0.1, 29);

    PanelDataset scaled = d;
    scaled.values.col(scaled.column_index("x1")) *= 2.0;
    scaled.values.col(scaled.column_index("z2")) *= 0.5;
    const LingamResult after = lingam_fit(scaled, 0.1, 29);

    auto edge_set = [](const WeightedDag& g) {
        std::vector<std::string> out;
        for (const auto& e : g.edges) out.push_back(e.from + ">" + e.to);
        std::sort(out.begin(), out.end());
        return out;
    };
    CHECK(edge_set(base.pruned_graph) == edge_set(after.pruned_graph));
}

TEST_CASE("lingam is deterministic per seed") {
    const PanelDataset d = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 4000, 3);
    const LingamResult a = lingam_fit(d, 0.1, 17);
    const LingamResult b = lingam_fit(d, 0.1, 17);
    CHECK(a.b_matrix == b.b_matrix);
    CHECK(a.causal_order == b.causal_order);
}

TEST_CASE("var-lingam recovers model A plus the y self-lag") {
    const PanelDataset d = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 10000, 7);
    const VarLingamResult r = var_lingam_fit(d, 1, 0.1, 41);

    // Contemporaneous part: the five true edges.
    REQUIRE(r.contemporaneous.pruned_graph.edges.size() == 5);
    CHECK(r.contemporaneous.pruned_graph.weight_of("x1", "y").value_or(0.0) ==
          doctest::Approx(1.0).epsilon(0.1));

    // Lagged part: y[t-1] -> y with weight alpha = 0.5.
    const auto y = static_cast<Eigen::Index>(d.column_index("y"));
    CHECK(r.lag_matrices[0](y, y) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(r.lagged_graph.weight_of("y[t-1]", "y").has_value());
    // No other lag entry survives the threshold.
    CHECK(r.lagged_graph.edges.size() == 1);
}

TEST_CASE("var-lingam on a single AR(1) pair recovers the lag weight") {
    // AR(1) with alpha = 0.5 and uniform noise, plus an independent uniform
    // column so K >= 2; oracle tolerance 0.05.
    Rng rng(57);
    const Eigen::Index n = 20000;
    Eigen::MatrixXd v(n, 2);
    double prev = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        prev = 0.5 * prev + rng.uniform(-1.0, 1.0);
        v(t, 0) = prev;
        v(t, 1) = rng.uniform(-1.0, 1.0);
    }
    const VarLingamResult r = var_lingam_fit(panel_from(v, {"w", "u"}), 1, 0.1, 5);
    CHECK(r.lag_matrices[0](0, 0) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(r.lag_matrices[0](0, 0) - 0.5) < 0.05);
}

TEST_CASE("white-noise panel yields empty graphs") {
    const Eigen::MatrixXd x = uniform_matrix(10000, 3, 71);
    const VarLingamResult r = var_lingam_fit(panel_from(x, {"a", "b", "c"}), 1, 0.1, 3);
    CHECK(r.contemporaneous.pruned_graph.edges.empty());
    CHECK(r.lagged_graph.edges.empty());
}

TEST_CASE("compare_graphs classifies matches, reversals, spurious and missing") {
    WeightedDag truth;
    truth.nodes = {"a", "b", "c"};
    truth.edges = {{"a", "b", 1.0}, {"b", "c", 2.0}};

    SUBCASE("identical graphs are clean") {
        const GraphComparison cmp = compare_graphs(truth, truth);
        CHECK(cmp.spurious_edges.empty());
        CHECK(cmp.missing_count == 0);
        CHECK(cmp.reversed_count == 0);
    }

    SUBCASE("a reversed edge is flagged") {
        WeightedDag found;
        found.nodes = {"a", "b", "c"};
        found.edges = {{"b", "a", 0.14}, {"b", "c", 2.0}};
        const GraphComparison cmp = compare_graphs(found, truth);
        CHECK(cmp.reversed_count == 1);
        CHECK(cmp.true_edges[0].reversed);
        CHECK(cmp.true_edges[0].found_weight == 0.14);
        CHECK(cmp.spurious_edges.empty());
    }

    SUBCASE("spurious and missing edges are counted") {
        WeightedDag found;
        found.nodes = {"a", "b", "c"};
        found.edges = {{"a", "b", 0.9}, {"a", "c", -1.11}};
        const GraphComparison cmp = compare_graphs(found, truth);
        CHECK(cmp.missing_count == 1);
        REQUIRE(cmp.spurious_edges.size() == 1);
        CHECK(cmp.spurious_edges[0].from == "a");
        CHECK(cmp.spurious_edges[0].to == "c");
    }

    SUBCASE("node mismatch is an error") {
        WeightedDag found;
        found.nodes = {"a", "b"};
        CHECK_THROWS(compare_graphs(found, truth));
    }
}

TEST_CASE("comparison renders to JSON and text") {
    WeightedDag truth;
    truth.nodes = {"a", "b"};
    truth.edges = {{"a", "b", 1.0}};
    WeightedDag found;
    found.nodes = {"a", "b"};
    found.edges = {{"b", "a", 0.3}};
    const GraphComparison cmp = compare_graphs(found, truth);
    const std::string json = comparison_to_json(cmp);
    CHECK(json.find("reversed") != std::string::npos);
    const std::string text = comparison_to_text(cmp);
    CHECK(text.find("a -> b") != std::string::npos);
    CHECK(text.find("reversed") != std::string::npos);
}
