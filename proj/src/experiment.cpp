#include "causalsynth/experiment.hpp"

#include "causalsynth/rng.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

namespace causalsynth {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.contains(key)) {
            throw std::runtime_error("config: unknown key '" + key + "' in " + where);
        }
    }
}

NoiseSpec noise_from_json(const json& j) {
    reject_unknown_keys(j, {"kind", "mean", "sd", "lo", "hi"}, "noise");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
        return NoiseSpec::gaussian(j.value("mean", 0.0), j.value("sd", 0.5));
    }
    if (kind == "uniform") {
        return NoiseSpec::uniform(j.value("lo", -1.0), j.value("hi", 1.0));
    }
    throw std::runtime_error("config: noise kind must be gaussian or uniform");
}

json noise_to_json(const NoiseSpec& n) {
    if (n.kind == NoiseSpec::Kind::Gaussian) {
        return {{"kind", "gaussian"}, {"mean", n.a}, {"sd", n.b}};
    }
    return {{"kind", "uniform"}, {"lo", n.a}, {"hi", n.b}};
}

GanConfig gan_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"latent_dim", "generator_hidden", "discriminator_hidden", "epochs",
                         "batch_size", "learning_rate", "adam_beta1", "adam_beta2",
                         "non_saturating"},
                        "gan");
    GanConfig cfg;
    cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
    cfg.generator_hidden = j.value("generator_hidden", cfg.generator_hidden);
    cfg.discriminator_hidden = j.value("discriminator_hidden", cfg.discriminator_hidden);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
    cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
    cfg.non_saturating = j.value("non_saturating", cfg.non_saturating);
    return cfg;
}

json gan_to_json(const GanConfig& cfg) {
    return {{"latent_dim", cfg.latent_dim},
            {"generator_hidden", cfg.generator_hidden},
            {"discriminator_hidden", cfg.discriminator_hidden},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"learning_rate", cfg.learning_rate},
            {"adam_beta1", cfg.adam_beta1},
            {"adam_beta2", cfg.adam_beta2},
            {"non_saturating", cfg.non_saturating}};
}

TimeGanConfig timegan_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"seq_len", "stride", "latent_dim", "noise_dim", "batch_size",
                         "epochs_embed", "epochs_supervise", "epochs_joint", "learning_rate",
                         "adam_beta1", "adam_beta2", "lambda_supervised", "kappa_supervised"},
                        "timegan");
    TimeGanConfig cfg;
    cfg.seq_len = j.value("seq_len", cfg.seq_len);
    cfg.stride = j.value("stride", cfg.stride);
    cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
    cfg.noise_dim = j.value("noise_dim", cfg.noise_dim);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs_embed = j.value("epochs_embed", cfg.epochs_embed);
    cfg.epochs_supervise = j.value("epochs_supervise", cfg.epochs_supervise);
    cfg.epochs_joint = j.value("epochs_joint", cfg.epochs_joint);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
    cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
    cfg.lambda_supervised = j.value("lambda_supervised", cfg.lambda_supervised);
    cfg.kappa_supervised = j.value("kappa_supervised", cfg.kappa_supervised);
    return cfg;
}

json timegan_to_json(const TimeGanConfig& cfg) {
    return {{"seq_len", cfg.seq_len},
            {"stride", cfg.stride},
            {"latent_dim", cfg.latent_dim},
            {"noise_dim", cfg.noise_dim},
            {"batch_size", cfg.batch_size},
            {"epochs_embed", cfg.epochs_embed},
            {"epochs_supervise", cfg.epochs_supervise},
            {"epochs_joint", cfg.epochs_joint},
            {"learning_rate", cfg.learning_rate},
            {"adam_beta1", cfg.adam_beta1},
            {"adam_beta2", cfg.adam_beta2},
            {"lambda_supervised", cfg.lambda_supervised},
            {"kappa_supervised", cfg.kappa_supervised}};
}

CausalGanConfig causalgan_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"noise_dim", "sub_hidden", "discriminator_hidden", "epochs", "batch_size",
                         "learning_rate", "adam_beta1", "adam_beta2", "non_saturating"},
                        "causalgan");
    CausalGanConfig cfg;
    cfg.noise_dim = j.value("noise_dim", cfg.noise_dim);
    cfg.sub_hidden = j.value("sub_hidden", cfg.sub_hidden);
    cfg.discriminator_hidden = j.value("discriminator_hidden", cfg.discriminator_hidden);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
    cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
    cfg.non_saturating = j.value("non_saturating", cfg.non_saturating);
    return cfg;
}

json causalgan_to_json(const CausalGanConfig& cfg) {
    return {{"noise_dim", cfg.noise_dim},
            {"sub_hidden", cfg.sub_hidden},
            {"discriminator_hidden", cfg.discriminator_hidden},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"learning_rate", cfg.learning_rate},
            {"adam_beta1", cfg.adam_beta1},
            {"adam_beta2", cfg.adam_beta2},
            {"non_saturating", cfg.non_saturating}};
}

json estimate_set_to_json(const EstimateSet& e) {
    json j;
    j["params"] = e.params;
    j["standard_errors"] = e.standard_errors;
    j["order_forced"] = e.order_forced;
    if (e.lingam_graph) j["lingam_graph"] = json::parse(dag_to_json(*e.lingam_graph));
    if (e.var_lingam_graph) {
        j["var_lingam_graph"] = json::parse(dag_to_json(*e.var_lingam_graph));
    }
    if (e.var_lingam_lagged) {
        j["var_lingam_lagged"] = json::parse(dag_to_json(*e.var_lingam_lagged));
    }
    return j;
}

EstimateSet estimate_set_from_json(const json& j) {
    EstimateSet e;
    e.params = j.at("params").get<std::map<std::string, double>>();
    e.standard_errors = j.at("standard_errors").get<std::map<std::string, double>>();
    e.order_forced = j.value("order_forced", false);
    if (j.contains("lingam_graph")) e.lingam_graph = dag_from_json(j.at("lingam_graph").dump());
    if (j.contains("var_lingam_graph")) {
        e.var_lingam_graph = dag_from_json(j.at("var_lingam_graph").dump());
    }
    if (j.contains("var_lingam_lagged")) {
        e.var_lingam_lagged = dag_from_json(j.at("var_lingam_lagged").dump());
    }
    return e;
}

json run_to_json(const RunRecord& r) {
    json j;
    j["index"] = r.index;
    j["seeds"] = r.seeds;
    j["real"] = estimate_set_to_json(r.real);
    if (r.synthetic) j["synthetic"] = estimate_set_to_json(*r.synthetic);
    j["baseline_ok"] = r.baseline_ok;
    j["baseline_failures"] = r.baseline_failures;
    j["complete"] = r.complete;
    j["error"] = r.error;
    j["wall_seconds"] = r.wall_seconds;
    j["artifacts"] = r.artifacts;
    return j;
}

RunRecord run_from_json(const json& j) {
    RunRecord r;
    r.index = j.at("index").get<std::size_t>();
    r.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    r.real = estimate_set_from_json(j.at("real"));
    if (j.contains("synthetic")) r.synthetic = estimate_set_from_json(j.at("synthetic"));
    r.baseline_ok = j.at("baseline_ok").get<bool>();
    r.baseline_failures = j.at("baseline_failures").get<std::vector<std::string>>();
    r.complete = j.at("complete").get<bool>();
    r.error = j.value("error", "");
    r.wall_seconds = j.value("wall_seconds", 0.0);
    r.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    return r;
}

}  // namespace

std::string generator_name(GeneratorKind g) {
    switch (g) {
        case GeneratorKind::None: return "none";
        case GeneratorKind::Gan: return "gan";
        case GeneratorKind::TimeGan: return "timegan";
        case GeneratorKind::CausalGan: return "causalgan";
    }
    return "none";
}

std::string estimator_name(EstimatorKind e) {
    switch (e) {
        case EstimatorKind::Ols: return "ols";
        case EstimatorKind::Ar: return "ar";
        case EstimatorKind::Lingam: return "lingam";
        case EstimatorKind::VarLingam: return "var_lingam";
    }
    return "ols";
}

ScmSpec ExperimentConfig::scm_spec() const {
    return model == 'A' ? model_a(noise) : model_b(noise);
}

ExperimentConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    reject_unknown_keys(j,
                        {"schema_version", "model", "noise", "n_samples", "generator",
                         "estimators", "repetitions", "master_seed", "output_dir",
                         "parallel_jobs", "lingam_prune_threshold", "causal_graph_source", "gan",
                         "timegan", "causalgan", "baseline_se_tolerance"},
                        "experiment config");
    ExperimentConfig cfg;
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1) {
        throw std::runtime_error("config: unsupported schema_version");
    }
    const std::string model = j.value("model", "A");
    if (model != "A" && model != "B") throw std::runtime_error("config: model must be A or B");
    cfg.model = model[0];
    if (j.contains("noise")) cfg.noise = noise_from_json(j.at("noise"));
    cfg.n_samples = j.value("n_samples", cfg.n_samples);
    const std::string gen = j.value("generator", "none");
    if (gen == "none") cfg.generator = GeneratorKind::None;
    else if (gen == "gan") cfg.generator = GeneratorKind::Gan;
    else if (gen == "timegan") cfg.generator = GeneratorKind::TimeGan;
    else if (gen == "causalgan") cfg.generator = GeneratorKind::CausalGan;
    else throw std::runtime_error("config: unknown generator '" + gen + "'");
    if (j.contains("estimators")) {
        cfg.estimators.clear();
        for (const auto& e : j.at("estimators")) {
            const std::string name = e.get<std::string>();
            if (name == "ols") cfg.estimators.push_back(EstimatorKind::Ols);
            else if (name == "ar") cfg.estimators.push_back(EstimatorKind::Ar);
            else if (name == "lingam") cfg.estimators.push_back(EstimatorKind::Lingam);
            else if (name == "var_lingam") cfg.estimators.push_back(EstimatorKind::VarLingam);
            else throw std::runtime_error("config: unknown estimator '" + name + "'");
        }
    }
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    if (cfg.repetitions < 1) throw std::runtime_error("config: repetitions must be >= 1");
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.parallel_jobs = j.value("parallel_jobs", cfg.parallel_jobs);
    cfg.lingam_prune_threshold = j.value("lingam_prune_threshold", cfg.lingam_prune_threshold);
    const std::string src = j.value("causal_graph_source", "discovered");
    if (src == "truth") cfg.causal_graph_source = GraphSource::Truth;
    else if (src == "discovered") cfg.causal_graph_source = GraphSource::Discovered;
    else throw std::runtime_error("config: causal_graph_source must be truth or discovered");
    if (j.contains("gan")) cfg.gan = gan_from_json(j.at("gan"));
    if (j.contains("timegan")) cfg.timegan = timegan_from_json(j.at("timegan"));
    if (j.contains("causalgan")) cfg.causalgan = causalgan_from_json(j.at("causalgan"));
    cfg.baseline_se_tolerance = j.value("baseline_se_tolerance", cfg.baseline_se_tolerance);
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["model"] = std::string(1, cfg.model);
    j["noise"] = noise_to_json(cfg.noise);
    j["n_samples"] = cfg.n_samples;
    j["generator"] = generator_name(cfg.generator);
    std::vector<std::string> est;
    for (auto e : cfg.estimators) est.push_back(estimator_name(e));
    j["estimators"] = est;
    j["repetitions"] = cfg.repetitions;
    j["master_seed"] = cfg.master_seed;
    j["output_dir"] = cfg.output_dir;
    j["parallel_jobs"] = cfg.parallel_jobs;
    j["lingam_prune_threshold"] = cfg.lingam_prune_threshold;
    j["causal_graph_source"] =
        cfg.causal_graph_source == GraphSource::Truth ? "truth" : "discovered";
    j["gan"] = gan_to_json(cfg.gan);
    j["timegan"] = timegan_to_json(cfg.timegan);
    j["causalgan"] = causalgan_to_json(cfg.causalgan);
    j["baseline_se_tolerance"] = cfg.baseline_se_tolerance;
    return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json(text);
}

EstimateSet estimate_dataset(const PanelDataset& data,
                             const std::vector<EstimatorKind>& estimators,
                             double prune_threshold, std::uint64_t seed, bool force_order) {
    EstimateSet out;
    for (const auto estimator : estimators) {
        switch (estimator) {
            case EstimatorKind::Ols: {
                RegressionSpec x1_spec{"x1", {{"z1", 0}, {"z2", 0}}, true};
                const EstimateReport r1 = ols_fit(data, x1_spec);
                out.params["beta3"] = r1.coefficient("z1");
                out.params["beta4"] = r1.coefficient("z2");
                out.standard_errors["beta3"] = r1.standard_error("z1");
                out.standard_errors["beta4"] = r1.standard_error("z2");
                RegressionSpec x2_spec{"x2", {{"z2", 0}}, true};
                const EstimateReport r2 = ols_fit(data, x2_spec);
                out.params["beta5"] = r2.coefficient("z2");
                out.standard_errors["beta5"] = r2.standard_error("z2");
                break;
            }
            case EstimatorKind::Ar: {
                RegressionSpec y_spec{"y", {{"y", 1}, {"x1", 0}, {"x2", 0}}, true};
                const bool need_force = !data.time_indexed;
                const EstimateReport r = ar_fit(data, y_spec, need_force && force_order);
                out.params["alpha"] = r.coefficient("y[t-1]");
                out.params["beta1"] = r.coefficient("x1");
                out.params["beta2"] = r.coefficient("x2");
                out.standard_errors["alpha"] = r.standard_error("y[t-1]");
                out.standard_errors["beta1"] = r.standard_error("x1");
                out.standard_errors["beta2"] = r.standard_error("x2");
                out.order_forced = out.order_forced || r.diagnostics.at("order_forced") == 1.0;
                break;
            }
            case EstimatorKind::Lingam: {
                const LingamResult r = lingam_fit(data, prune_threshold, seed);
                out.lingam_graph = r.pruned_graph;
                break;
            }
            case EstimatorKind::VarLingam: {
                PanelDataset ordered = data;
                if (!ordered.time_indexed && force_order) ordered.time_indexed = true;
                const VarLingamResult r = var_lingam_fit(ordered, 1, prune_threshold, seed);
                out.var_lingam_graph = r.contemporaneous.pruned_graph;
                out.var_lingam_lagged = r.lagged_graph;
                break;
            }
        }
    }
    return out;
}

namespace {

RunRecord run_one(const ExperimentConfig& cfg, std::size_t index) {
    const auto start = std::chrono::steady_clock::now();
    RunRecord record;
    record.index = index;
    const std::uint64_t base = cfg.master_seed;
    record.seeds["data"] = derive_seed(base, index * 16 + 1);
    record.seeds["generator"] = derive_seed(base, index * 16 + 2);
    record.seeds["synthetic"] = derive_seed(base, index * 16 + 3);
    record.seeds["discovery_real"] = derive_seed(base, index * 16 + 4);
    record.seeds["discovery_synthetic"] = derive_seed(base, index * 16 + 5);

    const std::filesystem::path run_dir =
        std::filesystem::path(cfg.output_dir) / ("run_" + std::to_string(index));
    std::filesystem::create_directories(run_dir);

    try {
        const ScmSpec spec = cfg.scm_spec();
        const PanelDataset generated = sample(spec, cfg.n_samples, record.seeds["data"]);
        {
            const std::string path = (run_dir / "generated.csv").string();
            write_csv(generated, path);
            write_sidecar(generated, path);
            record.artifacts["generated"] = path;
        }

        record.real = estimate_dataset(generated, cfg.estimators, cfg.lingam_prune_threshold,
                                       record.seeds["discovery_real"], false);

        // Baseline gate: the estimators must recover the ground truth on the
        // generated data, otherwise synthetic-side deviations mean nothing.
        const TrueParams truth = ground_truth(spec);
        const std::map<std::string, double> truth_map = {
            {"alpha", truth.alpha},  {"beta1", truth.betas[0]}, {"beta2", truth.betas[1]},
            {"beta3", truth.betas[2]}, {"beta4", truth.betas[3]}, {"beta5", truth.betas[4]}};
        for (const auto& [name, value] : record.real.params) {
            const double target = truth_map.at(name);
            const double se = record.real.standard_errors.at(name);
            if (std::abs(value - target) > cfg.baseline_se_tolerance * se) {
                record.baseline_ok = false;
                record.baseline_failures.push_back(name);
            }
        }
        if (record.real.lingam_graph) {
            const GraphComparison cmp =
                compare_graphs(*record.real.lingam_graph, true_graph(spec));
            if (cmp.missing_count > 0 || cmp.reversed_count > 0 || !cmp.spurious_edges.empty()) {
                record.baseline_ok = false;
                record.baseline_failures.push_back("lingam_graph");
            }
        }

        PanelDataset synthetic;
        bool have_synthetic = false;
        switch (cfg.generator) {
            case GeneratorKind::None:
                break;
            case GeneratorKind::Gan: {
                GanConfig gan_cfg = cfg.gan;
                gan_cfg.seed = record.seeds["generator"];
                const TrainedGan gan = train_gan(generated, gan_cfg);
                const std::string ckpt = (run_dir / "gan.json").string();
                save_gan(gan, ckpt);
                record.artifacts["checkpoint"] = ckpt;
                const std::string log_path = (run_dir / "training_log.json").string();
                std::ofstream(log_path) << training_log_to_json(gan.log) << '\n';
                record.artifacts["training_log"] = log_path;
                synthetic = sample_gan(gan, cfg.n_samples, record.seeds["synthetic"]);
                have_synthetic = true;
                break;
            }
            case GeneratorKind::TimeGan: {
                TimeGanConfig tg_cfg = cfg.timegan;
                tg_cfg.seed = record.seeds["generator"];
                const TimeGanNets nets = train_timegan(generated, tg_cfg);
                const std::string ckpt = (run_dir / "timegan.json").string();
                save_timegan(nets, ckpt);
                record.artifacts["checkpoint"] = ckpt;
                {
                    json log = json::array();
                    for (const auto& e : nets.log) {
                        log.push_back({{"phase", e.phase},
                                       {"epoch", e.epoch},
                                       {"reconstruction", e.reconstruction},
                                       {"supervised", e.supervised},
                                       {"d_loss", e.d_loss},
                                       {"g_loss", e.g_adversarial}});
                    }
                    const std::string log_path = (run_dir / "training_log.json").string();
                    std::ofstream(log_path) << log.dump(2) << '\n';
                    record.artifacts["training_log"] = log_path;
                }
                const std::size_t windows =
                    (cfg.n_samples + tg_cfg.seq_len - 1) / tg_cfg.seq_len;
                synthetic =
                    sample_timegan(nets, windows, record.seeds["synthetic"]).head(cfg.n_samples);
                have_synthetic = true;
                break;
            }
            case GeneratorKind::CausalGan: {
                WeightedDag graph;
                if (cfg.causal_graph_source == GraphSource::Truth) {
                    graph = true_graph(spec);
                } else if (record.real.lingam_graph) {
                    graph = *record.real.lingam_graph;
                } else {
                    graph = lingam_fit(generated, cfg.lingam_prune_threshold,
                                       record.seeds["discovery_real"])
                                .pruned_graph;
                }
                const std::string graph_path = (run_dir / "input_graph.json").string();
                write_dag(graph, graph_path);
                record.artifacts["input_graph"] = graph_path;

                CausalGanConfig cg_cfg = cfg.causalgan;
                cg_cfg.seed = record.seeds["generator"];
                const TrainedCausalGan gan = train_causal_gan(generated, graph, cg_cfg);
                const std::string ckpt = (run_dir / "causalgan.json").string();
                save_causal_gan(gan, ckpt);
                record.artifacts["checkpoint"] = ckpt;
                const std::string log_path = (run_dir / "training_log.json").string();
                std::ofstream(log_path) << training_log_to_json(gan.log) << '\n';
                record.artifacts["training_log"] = log_path;
                synthetic = sample_causal(gan.generator, cfg.n_samples, record.seeds["synthetic"]);
                have_synthetic = true;
                break;
            }
        }

        if (have_synthetic) {
            const std::string path = (run_dir / "synthetic.csv").string();
            write_csv(synthetic, path);
            write_sidecar(synthetic, path);
            record.artifacts["synthetic"] = path;
            record.synthetic =
                estimate_dataset(synthetic, cfg.estimators, cfg.lingam_prune_threshold,
                                 record.seeds["discovery_synthetic"], true);
        }

        record.complete = true;
    } catch (const std::exception& e) {
        record.error = e.what();
        record.complete = false;
    }

    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json estimates;
    estimates["real"] = estimate_set_to_json(record.real);
    if (record.synthetic) estimates["synthetic"] = estimate_set_to_json(*record.synthetic);
    const std::string est_path = (run_dir / "estimates.json").string();
    std::ofstream(est_path) << estimates.dump(2) << '\n';
    record.artifacts["estimates"] = est_path;

    const std::string manifest_path = (run_dir / "manifest.json").string();
    std::ofstream(manifest_path) << run_to_json(record).dump(2) << '\n';
    record.artifacts["manifest"] = manifest_path;
    return record;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);

    ExperimentReport report;
    report.config = cfg;
    report.runs.resize(cfg.repetitions);

    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.parallel_jobs, cfg.repetitions));
    if (jobs == 1) {
        for (std::size_t i = 0; i < cfg.repetitions; ++i) report.runs[i] = run_one(cfg, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cfg.repetitions) return;
                    report.runs[i] = run_one(cfg, i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    const auto [real_agg, synth_agg] = aggregate(report.runs);
    report.real_aggregate = real_agg;
    report.synthetic_aggregate = synth_agg;

    std::ofstream((std::filesystem::path(cfg.output_dir) / "report.json").string())
        << report_to_json_text(report) << '\n';
    std::ofstream((std::filesystem::path(cfg.output_dir) / "tables.txt").string())
        << render_tables(report);
    return report;
}

std::pair<std::map<std::string, AggregateEntry>, std::map<std::string, AggregateEntry>>
aggregate(const std::vector<RunRecord>& records) {
    std::size_t complete = 0;
    for (const auto& r : records) {
        if (r.complete) ++complete;
    }
    if (complete == 0) throw std::runtime_error("aggregate: no complete runs");

    const auto collect = [&](bool synthetic) {
        std::map<std::string, std::vector<double>> values;
        for (const auto& r : records) {
            if (!r.complete) continue;
            if (synthetic && !r.synthetic) continue;
            const auto& params = synthetic ? r.synthetic->params : r.real.params;
            for (const auto& [name, value] : params) values[name].push_back(value);
        }
        std::map<std::string, AggregateEntry> out;
        for (const auto& [name, vals] : values) {
            AggregateEntry e;
            e.n = vals.size();
            double sum = 0.0;
            for (double v : vals) sum += v;
            e.mean = sum / static_cast<double>(vals.size());
            if (vals.size() > 1) {
                double ss = 0.0;
                for (double v : vals) ss += (v - e.mean) * (v - e.mean);
                e.sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
            }
            out[name] = e;
        }
        return out;
    };
    return {collect(false), collect(true)};
}

bool ExperimentReport::all_complete() const {
    for (const auto& r : runs) {
        if (!r.complete) return false;
    }
    return !runs.empty();
}

bool ExperimentReport::all_baseline_ok() const {
    for (const auto& r : runs) {
        if (!r.complete || !r.baseline_ok) return false;
    }
    return !runs.empty();
}

std::string report_to_json_text(const ExperimentReport& report) {
    json j;
    j["schema_version"] = 1;
    j["config"] = json::parse(config_to_json(report.config));
    j["runs"] = json::array();
    for (const auto& r : report.runs) j["runs"].push_back(run_to_json(r));
    const auto agg_json = [](const std::map<std::string, AggregateEntry>& agg) {
        json out;
        for (const auto& [name, e] : agg) {
            out[name] = {{"mean", e.mean}, {"sd", e.sd}, {"n", e.n}};
        }
        return out;
    };
    j["real_aggregate"] = agg_json(report.real_aggregate);
    j["synthetic_aggregate"] = agg_json(report.synthetic_aggregate);
    return j.dump(2);
}

ExperimentReport report_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    ExperimentReport report;
    report.config = config_from_json(j.at("config").dump());
    for (const auto& rj : j.at("runs")) report.runs.push_back(run_from_json(rj));
    const auto agg_from = [](const json& in) {
        std::map<std::string, AggregateEntry> out;
        for (const auto& [name, e] : in.items()) {
            out[name] = {e.at("mean").get<double>(), e.at("sd").get<double>(),
                         e.at("n").get<std::size_t>()};
        }
        return out;
    };
    report.real_aggregate = agg_from(j.at("real_aggregate"));
    report.synthetic_aggregate = agg_from(j.at("synthetic_aggregate"));
    return report;
}

std::string render_tables(const ExperimentReport& report) {
    std::ostringstream os;
    const std::string synth_label = generator_name(report.config.generator);

    const auto cell = [](const std::map<std::string, AggregateEntry>& agg,
                         const std::string& name) -> std::string {
        const auto it = agg.find(name);
        if (it == agg.end()) return "—";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4f ± %.4f", it->second.mean, it->second.sd);
        return buf;
    };

    struct Row {
        const char* model;
        const char* param;
    };
    const std::vector<Row> rows = {{"OLS", "beta3"}, {"OLS", "beta4"}, {"OLS", "beta5"},
                                   {"TS", "alpha"},  {"TS", "beta1"},  {"TS", "beta2"}};

    bool any = false;
    for (const auto& row : rows) {
        if (report.real_aggregate.contains(row.param)) any = true;
    }
    if (any) {
        os << "model  parameter  real                 " << synth_label << '\n';
        for (const auto& row : rows) {
            if (!report.real_aggregate.contains(row.param) &&
                !report.synthetic_aggregate.contains(row.param)) {
                continue;
            }
            char line[160];
            std::snprintf(line, sizeof(line), "%-6s %-10s %-20s %s", row.model, row.param,
                          cell(report.real_aggregate, row.param).c_str(),
                          cell(report.synthetic_aggregate, row.param).c_str());
            os << line << '\n';
        }
    }

    // Discovery sections: per run, synthetic discovery compared against the
    // discovery on that run's generated data.
    for (const auto& run : report.runs) {
        if (!run.complete || !run.real.lingam_graph) continue;
        os << "\nrun " << run.index << " discovery (generated data):\n";
        for (const auto& e : run.real.lingam_graph->edges) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "  %s -> %s  %.2f", e.from.c_str(), e.to.c_str(),
                          e.weight);
            os << buf << '\n';
        }
        if (run.synthetic && run.synthetic->lingam_graph) {
            os << "run " << run.index << " discovery (synthetic vs generated):\n";
            const GraphComparison cmp =
                compare_graphs(*run.synthetic->lingam_graph, *run.real.lingam_graph);
            std::istringstream lines(comparison_to_text(cmp));
            std::string line;
            while (std::getline(lines, line)) os << "  " << line << '\n';
        }
    }
    return os.str();
}

}  // namespace causalsynth
