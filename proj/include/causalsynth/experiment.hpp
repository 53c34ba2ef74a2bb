#pragma once

#include "causalsynth/causalgan.hpp"
#include "causalsynth/gan.hpp"
#include "causalsynth/lingam.hpp"
#include "causalsynth/regression.hpp"
#include "causalsynth/scm.hpp"
#include "causalsynth/timegan.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace causalsynth {

enum class GeneratorKind { None, Gan, TimeGan, CausalGan };
enum class EstimatorKind { Ols, Ar, Lingam, VarLingam };
enum class GraphSource { Truth, Discovered };

std::string generator_name(GeneratorKind g);
std::string estimator_name(EstimatorKind e);

struct ExperimentConfig {
    char model = 'A';
    NoiseSpec noise = NoiseSpec::gaussian(0.0, 0.5);
    std::size_t n_samples = 10000;
    GeneratorKind generator = GeneratorKind::None;
    std::vector<EstimatorKind> estimators = {EstimatorKind::Ols, EstimatorKind::Ar};
    std::size_t repetitions = 10;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    std::size_t parallel_jobs = 1;
    double lingam_prune_threshold = 0.1;
    GraphSource causal_graph_source = GraphSource::Discovered;
    GanConfig gan;
    TimeGanConfig timegan;
    CausalGanConfig causalgan;
    /// Baseline gate width: estimates on generated data must sit within this
    /// many standard errors of the ground truth.
    double baseline_se_tolerance = 5.0;

    ScmSpec scm_spec() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Named coefficient estimates from one dataset, plus discovery output when
/// a discovery estimator ran.
struct EstimateSet {
    std::map<std::string, double> params;
    std::map<std::string, double> standard_errors;
    std::optional<WeightedDag> lingam_graph;
    std::optional<WeightedDag> var_lingam_graph;
    std::optional<WeightedDag> var_lingam_lagged;
    bool order_forced = false;
};

struct RunRecord {
    std::size_t index = 0;
    std::map<std::string, std::uint64_t> seeds;
    EstimateSet real;
    std::optional<EstimateSet> synthetic;
    bool baseline_ok = true;
    std::vector<std::string> baseline_failures;
    bool complete = false;
    std::string error;
    double wall_seconds = 0.0;
    std::map<std::string, std::string> artifacts;
};

struct AggregateEntry {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<RunRecord> runs;
    std::map<std::string, AggregateEntry> real_aggregate;
    std::map<std::string, AggregateEntry> synthetic_aggregate;

    bool all_complete() const;
    bool all_baseline_ok() const;
};

/// Runs the named estimators on one dataset. `truth` supplies the graph for
/// discovery comparisons; `force_order` lets the AR estimator treat i.i.d.
/// generator output as ordered (recorded in the result).
EstimateSet estimate_dataset(const PanelDataset& data,
                             const std::vector<EstimatorKind>& estimators,
                             double prune_threshold, std::uint64_t seed, bool force_order);

/// The whole pipeline: per repetition, sample generated data, validate the
/// estimators on it against the ground truth, train the configured
/// generator, sample synthetic rows, estimate on those, and persist every
/// artifact under output_dir/run_<i>/. Repetitions may run in parallel; all
/// randomness is a pure function of (master_seed, repetition).
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Sample mean and (n-1) sample standard deviation per parameter across the
/// complete runs. Throws when no run is complete.
std::pair<std::map<std::string, AggregateEntry>, std::map<std::string, AggregateEntry>>
aggregate(const std::vector<RunRecord>& records);

std::string report_to_json_text(const ExperimentReport& report);
ExperimentReport report_from_json_text(const std::string& text);

/// Aligned text tables (mean +/- sd, 4 decimals) in the row order beta3,
/// beta4, beta5, alpha, beta1, beta2; an absent synthetic column renders as
/// an em dash. Discovery output renders as an edge comparison per run.
std::string render_tables(const ExperimentReport& report);

}  // namespace causalsynth
