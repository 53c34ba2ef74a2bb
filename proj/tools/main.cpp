#include <json.hpp>
#include "causalsynth/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace causalsynth;

namespace {

NoiseSpec parse_noise(const std::string& kind, double a, double b) {
    if (kind == "gaussian") return NoiseSpec::gaussian(a, b);
    if (kind == "uniform") return NoiseSpec::uniform(a, b);
    throw std::runtime_error("noise must be gaussian or uniform");
}

RegressionSpec parse_regression(const std::string& target, const std::string& regressors) {
    RegressionSpec spec;
    spec.target = target;
    std::stringstream ss(regressors);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        Regressor r;
        r.variable = item.substr(0, colon);
        r.lag = colon == std::string::npos ? 0 : std::stoi(item.substr(colon + 1));
        spec.regressors.push_back(r);
    }
    return spec;
}

PanelDataset load_panel(const std::string& path) {
    PanelDataset data = read_csv(path);
    apply_sidecar_if_present(data, path);
    return data;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causalsynth: causal-structure preservation benchmark for GAN generators"};
    app.require_subcommand(1);
    app.fallthrough(true);  // global flags may follow the subcommand

    std::string config_path, out_path, data_path;
    std::uint64_t seed = 1;
    app.add_option("--config", config_path, "JSON config file")->capture_default_str();
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--out", out_path, "output path")->capture_default_str();

    // generate
    auto* generate = app.add_subcommand("generate", "sample a dataset from model A or B");
    std::string model = "A", noise_kind = "gaussian";
    double noise_a = 0.0, noise_b = 0.5;
    std::size_t n = 10000;
    generate->add_option("--model", model, "A or B");
    generate->add_option("--noise", noise_kind, "gaussian or uniform");
    generate->add_option("--noise-a", noise_a, "mean (gaussian) or lo (uniform)");
    generate->add_option("--noise-b", noise_b, "sd (gaussian) or hi (uniform)");
    generate->add_option("--n", n, "rows to sample");

    // train
    auto* train = app.add_subcommand("train", "train a generator on a CSV dataset");
    std::string kind = "gan", graph_path;
    train->add_option("--kind", kind, "gan | timegan | causalgan");
    train->add_option("--data", data_path, "training CSV")->required();
    train->add_option("--graph", graph_path, "causal graph JSON (causalgan)");

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "sample rows from a trained checkpoint");
    std::string checkpoint_path;
    std::size_t sample_n = 10000;
    sample_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
    sample_cmd->add_option("--n", sample_n, "rows to sample");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "fit OLS/AR on a CSV dataset");
    std::string est_type = "ols", target = "y", regressors = "x1:0,x2:0";
    bool force_order = false;
    estimate->add_option("--type", est_type, "ols | ar");
    estimate->add_option("--data", data_path, "CSV dataset")->required();
    estimate->add_option("--target", target, "target variable");
    estimate->add_option("--regressors", regressors, "comma list of var[:lag]");
    estimate->add_flag("--force-order", force_order, "treat unordered rows as time order");

    // discover
    auto* discover = app.add_subcommand("discover", "run (VAR-)LiNGAM on a CSV dataset");
    double threshold = 0.1;
    bool time_variant = false;
    discover->add_option("--data", data_path, "CSV dataset")->required();
    discover->add_option("--threshold", threshold, "prune threshold");
    discover->add_flag("--time-variant", time_variant, "use the lagged variant");

    // run-experiment
    auto* run = app.add_subcommand("run-experiment", "run the full pipeline from a config");

    // render
    auto* render = app.add_subcommand("render", "render tables from a report.json");
    std::string report_path;
    render->add_option("--report", report_path, "report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            const NoiseSpec noise = parse_noise(noise_kind, noise_a, noise_b);
            const ScmSpec spec = model == "A" ? model_a(noise) : model_b(noise);
            const PanelDataset data = causalsynth::sample(spec, n, seed);
            const std::string path = out_path.empty() ? "generated.csv" : out_path;
            write_csv(data, path);
            write_sidecar(data, path);
            std::cout << "wrote " << data.rows() << " rows to " << path << '\n';
        } else if (train->parsed()) {
            const PanelDataset data = load_panel(data_path);
            ExperimentConfig cfg;
            if (!config_path.empty()) cfg = load_config(config_path);
            const std::string path = out_path.empty() ? kind + ".json" : out_path;
            if (kind == "gan") {
                GanConfig gc = cfg.gan;
                gc.seed = seed;
                save_gan(train_gan(data, gc), path);
            } else if (kind == "timegan") {
                TimeGanConfig tc = cfg.timegan;
                tc.seed = seed;
                save_timegan(train_timegan(data, tc), path);
            } else if (kind == "causalgan") {
                if (graph_path.empty()) throw std::runtime_error("causalgan needs --graph");
                CausalGanConfig cc = cfg.causalgan;
                cc.seed = seed;
                const TrainedCausalGan gan = train_causal_gan(data, read_dag(graph_path), cc);
                save_causal_gan(gan, path);
            } else {
                throw std::runtime_error("unknown generator kind '" + kind + "'");
            }
            std::cout << "wrote checkpoint " << path << '\n';
        } else if (sample_cmd->parsed()) {
            std::ifstream in(checkpoint_path);
            if (!in) throw std::runtime_error("cannot open: " + checkpoint_path);
            nlohmann::json j;
            in >> j;
            const std::string format = j.value("format", "");
            PanelDataset data;
            if (format == "causalsynth-gan") {
                data = sample_gan(load_gan(checkpoint_path), sample_n, seed);
            } else if (format == "causalsynth-timegan") {
                const TimeGanNets nets = load_timegan(checkpoint_path);
                const std::size_t windows = (sample_n + nets.seq_len - 1) / nets.seq_len;
                data = sample_timegan(nets, windows, seed).head(sample_n);
            } else if (format == "causalsynth-causalgan") {
                data = sample_causal(load_causal_gan(checkpoint_path).generator, sample_n, seed);
            } else {
                throw std::runtime_error("unrecognized checkpoint format '" + format + "'");
            }
            const std::string path = out_path.empty() ? "synthetic.csv" : out_path;
            write_csv(data, path);
            write_sidecar(data, path);
            std::cout << "wrote " << data.rows() << " rows to " << path << '\n';
        } else if (estimate->parsed()) {
            const PanelDataset data = load_panel(data_path);
            const RegressionSpec spec = parse_regression(target, regressors);
            const EstimateReport report = est_type == "ar" ? ar_fit(data, spec, force_order)
                                                           : ols_fit(data, spec);
            const std::string text = report_to_json(report);
            if (out_path.empty()) {
                std::cout << text << '\n';
            } else {
                std::ofstream(out_path) << text << '\n';
            }
        } else if (discover->parsed()) {
            const PanelDataset data = load_panel(data_path);
            WeightedDag graph;
            if (time_variant) {
                graph = var_lingam_fit(data, 1, threshold, seed).contemporaneous.pruned_graph;
            } else {
                graph = lingam_fit(data, threshold, seed).pruned_graph;
            }
            const std::string text = dag_to_json(graph);
            if (out_path.empty()) {
                std::cout << text << '\n';
            } else {
                std::ofstream(out_path) << text << '\n';
            }
        } else if (run->parsed()) {
            if (config_path.empty()) throw std::runtime_error("run-experiment needs --config");
            ExperimentConfig cfg = load_config(config_path);
            if (!out_path.empty()) cfg.output_dir = out_path;
            const ExperimentReport report = run_experiment(cfg);
            std::cout << render_tables(report);
            if (report.all_complete() && report.all_baseline_ok()) return 0;
            std::cerr << "warning: incomplete or baseline-failing runs\n";
            return 1;
        } else if (render->parsed()) {
            std::ifstream in(report_path);
            if (!in) throw std::runtime_error("cannot open: " + report_path);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            std::cout << render_tables(report_from_json_text(text));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        const bool config_problem = std::string(e.what()).rfind("config", 0) == 0 ||
                                    std::string(e.what()).find("config:") != std::string::npos;
        return config_problem ? 2 : 1;
    }
    return 0;
}
