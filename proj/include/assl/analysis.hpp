#pragma once

// Post-hoc diagnostics over prediction snapshots and experiment results.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace assl::analysis {

/// Predictions for a fixed set of samples, taken at the same training steps.
/// Row s of each table holds snapshot s, aligned with `ids`.
class SnapshotSeries {
public:
    SnapshotSeries() = default;
    explicit SnapshotSeries(std::vector<int> ids);

    /// Appends one snapshot; the spans must be aligned with ids().
    void add(std::uint64_t step, std::span<const int> labels, std::span<const double> uncertainty,
             std::span<const double> max_prob);

    const std::vector<int>& ids() const { return ids_; }
    const std::vector<std::uint64_t>& steps() const { return steps_; }
    std::size_t num_snapshots() const { return steps_.size(); }
    std::size_t num_samples() const { return ids_.size(); }

    int label(std::size_t snapshot, std::size_t sample) const;
    double uncertainty(std::size_t snapshot, std::size_t sample) const;
    double max_prob(std::size_t snapshot, std::size_t sample) const;

    /// Column views across snapshots for one sample.
    std::vector<int> labels_of(std::size_t sample) const;
    std::vector<double> uncertainties_at(std::size_t snapshot) const;

    bool operator==(const SnapshotSeries&) const = default;

private:
    std::vector<int> ids_;
    std::vector<std::uint64_t> steps_;
    std::vector<int> labels_;
    std::vector<double> uncertainty_;
    std::vector<double> max_prob_;
};

/// Number of adjacent pairs whose labels differ. Throws InputError if empty.
int temporal_instability(std::span<const int> labels);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

/// Pearson correlation of fractional ranks. nullopt when either input has
/// no rank variance. Throws InputError on length mismatch or length < 2.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

/// Per-sample summary over all snapshots of a series.
struct SampleSummary {
    int sample_id = 0;
    int ti = 0;
    double mean_uncertainty = 0.0;
    int pseudo_count = 0;  // snapshots with max prob > threshold
};

std::vector<SampleSummary> summarize(const SnapshotSeries& series, double threshold = 0.95);

struct TiGroup {
    int ti = 0;
    std::size_t count = 0;
    double mean_u = 0.0;
    double std_u = 0.0;  // population standard deviation
};

/// Samples grouped by temporal instability, ascending.
std::vector<TiGroup> ti_uncertainty_profile(std::span<const SampleSummary> summaries);
std::vector<TiGroup> ti_uncertainty_profile(const SnapshotSeries& series);

/// Spearman correlation between TI and time-averaged uncertainty.
std::optional<double> ti_uncertainty_correlation(std::span<const SampleSummary> summaries);

/// Spearman correlation of uncertainty between snapshots s-1 and s, s >= 1.
std::vector<std::optional<double>> consecutive_rank_correlations(const SnapshotSeries& series);

/// Fraction of pseudo-labeled samples (flag set) within the top
/// ceil(top_frac * n) ids by score; ties broken by lower id. Every flagged id
/// must have a score. Throws InputError unless top_frac is in (0, 1].
double pseudo_labeled_ratio(const std::map<int, bool>& pseudo_labeled,
                            const std::map<int, double>& scores, double top_frac);

/// A sample is pseudo-labeled if its max probability exceeded `threshold` in
/// at least one snapshot.
double pseudo_labeled_ratio(const SnapshotSeries& series, const std::map<int, double>& scores,
                            double top_frac, double threshold = 0.95);

struct StrategyResults {
    std::string strategy;
    std::map<std::string, double> accuracy_by_setting;
};

struct PairwiseMatrix {
    std::vector<std::string> strategies;
    std::vector<std::vector<int>> wins;  // wins[i][j]: settings where i beat j
    std::vector<double> column_means;    // lower is better
    std::size_t settings = 0;
};

/// Throws InputError when strategies were evaluated on different settings.
PairwiseMatrix pairwise_matrix(std::span<const StrategyResults> results);

}  // namespace assl::analysis
