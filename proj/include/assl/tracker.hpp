#pragma once

// Streaming per-sample scores gathered while the model trains on unlabeled
// mini-batches. For every sample we keep an exponential moving average and
// exponential moving variance of two quantities:
//
//   uncertainty    u = || p(x_w) - onehot(argmax p(x_w)) ||_2
//   inconsistency  i = (KL(p_w || p_s) + KL(p_s || p_w)) / 2
//
// and rank samples by (u_mean + c_u sqrt(u_var)) * (i_mean + c_i sqrt(i_var)).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace assl::tracker {

struct PredictionEvent {
    int sample_id = 0;
    std::uint64_t appearance = 0;   // per-sample index t, 1-based
    std::uint64_t global_step = 0;  // training step that produced it
    std::vector<double> probs_weak;
    std::vector<double> probs_strong;
};

struct EmaState {
    double mean = 0.0;
    double var = 0.0;
    std::uint64_t count = 0;

    bool operator==(const EmaState&) const = default;
};

enum class VarianceOrder {
    PostUpdateMean,  // v_t uses (x_t - mean_t)
    PreUpdateMean,   // v_t uses (x_t - mean_{t-1})
};

/// Lowest index among the maxima.
std::size_t argmax(std::span<const double> probs);

/// Pseudo-EL2N: distance of `probs` from the one-hot vector of its argmax.
double uncertainty(std::span<const double> probs);

inline constexpr double kProbabilityFloor = 1e-12;

/// Symmetric KL divergence (natural log); probabilities are floored at 1e-12.
double inconsistency(std::span<const double> probs_weak, std::span<const double> probs_strong);

/// mean' = a x + (1 - a) mean;  var' = a (x - m)^2 + (1 - a) var with m the
/// new mean (or the previous one for PreUpdateMean). Throws TrackerError on a
/// non-finite value.
EmaState ema_update(const EmaState& state, double value, double alpha,
                    VarianceOrder order = VarianceOrder::PostUpdateMean);

double ucb(const EmaState& state, double c);

inline double final_score(double u_ucb, double i_ucb) { return u_ucb * i_ucb; }

struct TrackerParams {
    double alpha = 0.8;
    double c_u = 0.5;
    double c_i = 2.0;
    VarianceOrder order = VarianceOrder::PostUpdateMean;
};

struct SampleStats {
    EmaState uncertainty;
    EmaState inconsistency;
};

struct ScoreRow {
    int sample_id = 0;
    double u_mean = 0.0, u_var = 0.0, u_ucb = 0.0;
    double i_mean = 0.0, i_var = 0.0, i_ucb = 0.0;
    double score = 0.0;
    std::uint64_t count = 0;
};

/// Statistics for the samples currently in the unlabeled pool. Ids index a
/// dense table sized to the dataset, so lookups are O(1).
class TrackerStore {
public:
    TrackerStore() = default;
    TrackerStore(std::size_t capacity, TrackerParams params);

    const TrackerParams& params() const { return params_; }

    /// Start tracking exactly `ids`, all states zeroed.
    void reset(std::span<const int> ids);
    /// Stop tracking `ids` (e.g. after they were acquired).
    void remove(std::span<const int> ids);

    bool contains(int id) const;
    std::size_t size() const { return size_; }
    /// Sorted ids currently tracked.
    std::vector<int> ids() const;

    const SampleStats& stats(int id) const;
    /// Tracked and seen at least one event.
    bool observed(int id) const {
        return id >= 0 && static_cast<std::size_t>(id) < present_.size() &&
               present_[static_cast<std::size_t>(id)] == kObserved;
    }

    /// Updates the sample's states from one weak/strong prediction pair.
    /// Throws TrackerError for an unknown id or non-finite score.
    void ingest(const PredictionEvent& event);

    double uncertainty_ucb(int id) const;
    double inconsistency_ucb(int id) const;
    /// Final score, refreshed on every ingest.
    double score(int id) const;

    ScoreRow row(int id) const;
    /// One row per tracked id, ascending.
    std::vector<ScoreRow> snapshot() const;

private:
    TrackerParams params_;
    static constexpr char kTracked = 1, kObserved = 2;
    std::vector<SampleStats> stats_;
    std::vector<double> score_;  // dense so ranking touches one small array
    std::vector<char> present_;
    std::size_t size_ = 0;
};

/// `sample_id,u_mean,u_var,u_ucb,i_mean,i_var,i_ucb,score`
void write_scores_csv(std::span<const ScoreRow> rows, std::ostream& out);

}  // namespace assl::tracker
