#pragma once

// Multi-seed, multi-strategy active-learning experiments and their on-disk
// artifacts.

#include "assl/acquisition.hpp"
#include "assl/analysis.hpp"
#include "assl/data.hpp"
#include "assl/ssl.hpp"
#include "assl/tracker.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace assl::experiment {

struct PoolConfig {
    std::size_t n_init = 20;
    std::size_t n_test = 500;
    std::size_t acquire = 20;  // K per round
    std::size_t rounds = 5;
    bool stratified = true;
};

struct ExperimentConfig {
    data::GeneratorSpec dataset;
    bool standardize = true;
    PoolConfig pools;
    ssl::SslConfig ssl;
    std::vector<std::size_t> hidden{64, 64};
    tracker::TrackerParams tracker;
    bool carry_tracker = false;
    std::vector<acquisition::Strategy> strategies = acquisition::all_strategies();
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    acquisition::DiverseMode diverse_mode = acquisition::DiverseMode::Lloyd;
    std::string output_dir = "out";
    bool event_log = false;
    std::size_t threads = 0;  // 0 = hardware concurrency

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Reads a config file, or the config embedded in a run's manifest.json.
ExperimentConfig load_config(const std::filesystem::path& path);

struct RoundReport {
    std::size_t round = 0;
    acquisition::Strategy strategy = acquisition::Strategy::Random;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    std::size_t labeled = 0;    // at training time
    std::size_t unlabeled = 0;  // at training time
    ssl::RoundMetrics training;
    acquisition::Selection acquired;
    double acquisition_seconds = 0.0;
    std::uint64_t acquisition_forward_passes = 0;
};

struct RoundArtifacts {
    std::vector<tracker::ScoreRow> scores;
    std::vector<analysis::SampleSummary> samples;
    std::string event_log;  // CSV body, empty unless enabled
};

struct RunResult {
    std::uint64_t seed = 0;
    acquisition::Strategy strategy = acquisition::Strategy::Random;
    std::vector<RoundReport> reports;
    std::vector<RoundArtifacts> rounds;
    analysis::SnapshotSeries first_round_snapshots;
    std::vector<nn::ModelParams> round_start;  // parameters each round trained from
    std::vector<nn::ModelParams> round_final;
    std::string error;  // set when training diverged; reports hold the completed rounds
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<data::Dataset> datasets;  // one per seed, in config order
    std::vector<RunResult> runs;          // seed-major, strategies in config order

    std::vector<RoundReport> reports() const;
};

/// Dataset after generation and standardization, deterministic in the seed.
data::Dataset build_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                     acquisition::Strategy strategy);

/// Validates, then runs every (seed, strategy) pair, in parallel when
/// cfg.threads allows. Results do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes run logs and manifest.json under `out`, then the analysis CSVs.
void emit(const ExperimentResult& result, const std::filesystem::path& out);

struct PseudoRatioRow {
    std::uint64_t seed = 0;
    std::string strategy;
    std::size_t round = 0;
    std::string sorted_by;
    double top_frac = 0.0;
    double ratio = 0.0;
};

struct AnalysisSummary {
    std::map<std::uint64_t, std::optional<double>> ti_correlation;
    std::map<std::uint64_t, std::vector<analysis::TiGroup>> ti_profile;
    std::map<std::uint64_t, std::vector<std::optional<double>>> snapshot_correlations;
    std::vector<PseudoRatioRow> pseudo_ratios;
    analysis::PairwiseMatrix pairwise;
    std::map<std::string, double> mean_final_accuracy;
};

/// Recomputes every diagnostic from the logs in `dir` and writes
/// ti_profile.csv, ti_correlation.csv, spearman_series.csv, pseudo_ratio.csv,
/// pairwise_matrix.csv and accuracy_curve.csv next to them.
AnalysisSummary analyze_directory(const std::filesystem::path& dir);

}  // namespace assl::experiment
