#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causalsynth/causalgan.hpp"
#include "causalsynth/scm.hpp"
#include "test_util.hpp"

#include <filesystem>

using namespace causalsynth;

namespace {

WeightedDag collider_graph() {
    WeightedDag g;
    g.nodes = {"A", "B", "C"};
    g.edges = {{"A", "C", 1.0}, {"B", "C", 1.0}};
    return g;
}

CausalGanConfig tiny_config(std::uint64_t seed, std::size_t epochs) {
    CausalGanConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("collider wiring gives the right sub-generator arities") {
    const CausalGeneratorNet net = build_causal_generator(collider_graph(), tiny_config(1, 0));
    const std::size_t a = net.graph.node_index("A");
    const std::size_t b = net.graph.node_index("B");
    const std::size_t c = net.graph.node_index("C");
    CHECK(net.sub_input_arity(a) == net.noise_dim);
    CHECK(net.sub_input_arity(b) == net.noise_dim);
    CHECK(net.sub_input_arity(c) == 2 + net.noise_dim);
    CHECK(net.sub_generators[a].input_dim() == net.noise_dim);
    CHECK(net.sub_generators[c].input_dim() == 2 + net.noise_dim);
}

TEST_CASE("an isolated node is a pure noise transform") {
    WeightedDag g;
    g.nodes = {"solo"};
    const CausalGeneratorNet net = build_causal_generator(g, tiny_config(2, 0));
    CHECK(net.parents[0].empty());
    CHECK(net.sub_generators[0].input_dim() == net.noise_dim);
    const PanelDataset s = sample_causal(net, 1000, 3);
    CHECK(s.cols() == 1);
    CHECK(s.rows() == 1000);
}

TEST_CASE("model A graph evaluates z's, then x's, then y") {
    const WeightedDag g = true_graph(model_a(NoiseSpec::gaussian(0.0, 0.5)));
    const CausalGeneratorNet net = build_causal_generator(g, tiny_config(4, 0));
    std::vector<std::size_t> position(g.nodes.size());
    for (std::size_t i = 0; i < net.topo_order.size(); ++i) position[net.topo_order[i]] = i;
    const auto pos = [&](const std::string& name) { return position[g.node_index(name)]; };
    CHECK(pos("z1") < pos("x1"));
    CHECK(pos("z2") < pos("x1"));
    CHECK(pos("z2") < pos("x2"));
    CHECK(pos("x1") < pos("y"));
    CHECK(pos("x2") < pos("y"));
}

TEST_CASE("cyclic graphs are rejected") {
    WeightedDag g;
    g.nodes = {"a", "b"};
    g.edges = {{"a", "b", 1.0}, {"b", "a", 1.0}};
    CHECK_THROWS(build_causal_generator(g, tiny_config(5, 0)));
}

TEST_CASE("training rejects node/column mismatches") {
    const PanelDataset data = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 1000, 6);
    CHECK_THROWS(train_causal_gan(data, collider_graph(), tiny_config(7, 1)));
}

TEST_CASE("edgeless graphs give pairwise-independent columns") {
    WeightedDag g;
    g.nodes = {"a", "b", "c"};
    const CausalGeneratorNet net = build_causal_generator(g, tiny_config(8, 0));
    const PanelDataset s = sample_causal(net, 10000, 9);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
            CHECK(std::abs(testutil::correlation(
                      s.values.col(static_cast<Eigen::Index>(i)),
                      s.values.col(static_cast<Eigen::Index>(j)))) < 0.05);
        }
    }
}

TEST_CASE("root outputs stay mutually independent after training") {
    const PanelDataset data = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 3000, 10);
    const WeightedDag g = true_graph(model_a(NoiseSpec::uniform(-1.0, 1.0)));
    const TrainedCausalGan gan = train_causal_gan(data, g, tiny_config(11, 5));
    const PanelDataset s = sample_causal(gan.generator, 10000, 12);
    CHECK(std::abs(testutil::correlation(s.column("z1"), s.column("z2"))) < 0.05);
}

TEST_CASE("clamping shifts descendants and leaves non-descendants untouched") {
    WeightedDag g;
    g.nodes = {"a", "b"};
    g.edges = {{"a", "b", 1.0}};
    const PanelDataset data = [&] {
        ScmSpec spec;
        spec.variables = {"a", "b"};
        spec.equations = {{}, {{"a", 0, 1.5}}};
        spec.noise = {NoiseSpec::uniform(-1.0, 1.0), NoiseSpec::uniform(-1.0, 1.0)};
        return sample(spec, 3000, 13);
    }();
    const TrainedCausalGan gan = train_causal_gan(data, g, tiny_config(14, 10));

    const PanelDataset plain = sample_causal(gan.generator, 4000, 15);
    const PanelDataset clamp_a = sample_causal(gan.generator, 4000, 15, {{"a", 10.0}});
    const PanelDataset clamp_b = sample_causal(gan.generator, 4000, 15, {{"b", 10.0}});

    // Clamping the child leaves the root column bit-identical (same seed).
    CHECK(clamp_b.column("a") == plain.column("a"));
    CHECK(clamp_b.column("b").minCoeff() == 10.0);
    CHECK(clamp_b.column("b").maxCoeff() == 10.0);

    // Clamping the root shifts the child's distribution.
    const double ks = testutil::ks_statistic(testutil::to_vector(plain.column("b")),
                                             testutil::to_vector(clamp_a.column("b")));
    CHECK(ks > 0.1);
}

TEST_CASE("sampling is deterministic per seed") {
    const WeightedDag g = collider_graph();
    const CausalGeneratorNet net = build_causal_generator(g, tiny_config(16, 0));
    const PanelDataset a = sample_causal(net, 500, 17);
    const PanelDataset b = sample_causal(net, 500, 17);
    CHECK(a.values == b.values);
}

TEST_CASE("causal gan checkpoints round-trip") {
    const PanelDataset data = sample(model_a(NoiseSpec::uniform(-1.0, 1.0)), 1000, 18);
    const WeightedDag g = true_graph(model_a(NoiseSpec::uniform(-1.0, 1.0)));
    const TrainedCausalGan gan = train_causal_gan(data, g, tiny_config(19, 1));
    const std::string path = "causalgan_roundtrip_test.json";
    save_causal_gan(gan, path);
    const TrainedCausalGan back = load_causal_gan(path);
    const PanelDataset s1 = sample_causal(gan.generator, 300, 20);
    const PanelDataset s2 = sample_causal(back.generator, 300, 20);
    CHECK(s1.values == s2.values);
    std::filesystem::remove(path);
}
