#pragma once

// FixMatch-style training for one active-learning round: supervised
// cross-entropy on weakly augmented labeled samples plus a confidence-masked
// consistency term that fits strong views to pseudo-labels from weak views.

#include "assl/analysis.hpp"
#include "assl/data.hpp"
#include "assl/nn.hpp"
#include "assl/tracker.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

namespace assl::ssl {

enum class InitMode { RandInit, ConInit };

std::string_view to_string(InitMode mode);
InitMode parse_init_mode(std::string_view name);

struct SslConfig {
    std::size_t steps = 2000;
    std::size_t labeled_batch = 16;
    std::size_t unlabeled_ratio = 4;
    double threshold = 0.95;
    double unsup_weight = 1.0;
    double lr = 0.03;
    double momentum = 0.0;
    InitMode init = InitMode::ConInit;
    std::size_t snapshot_interval = 200;
    bool augment_labeled = true;
    data::WeakAugment weak;
    data::StrongAugment strong;

    std::size_t unlabeled_batch() const { return labeled_batch * unlabeled_ratio; }

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Class index when max(probs) > threshold (strict); ties resolve to the
/// lowest index.
std::optional<std::size_t> pseudo_label(std::span<const double> probs_weak, double threshold);

struct RoundMetrics {
    double test_accuracy = 0.0;
    double mean_sup_loss = 0.0;
    double mean_unsup_loss = 0.0;
    double mask_rate = 0.0;
    std::size_t steps = 0;
};

struct RoundResult {
    nn::ModelParams params;
    RoundMetrics metrics;
    analysis::SnapshotSeries snapshots;  // unlabeled pool, clean inputs
};

using EventObserver = std::function<void(const tracker::PredictionEvent&)>;

/// Trains `params` for cfg.steps steps. Every unlabeled sample seen in a
/// mini-batch is reported to `tracker` (and `observer`, if set) before the
/// gradient step that uses it. Randomness comes only from `seed`: labeled
/// batches and their augmentation draw from the "labeled" sub-stream,
/// unlabeled batches from the "unlabeled" sub-stream.
RoundResult train_round(nn::ModelParams params, const data::SamplePools& pools,
                        const data::Dataset& dataset, const SslConfig& cfg,
                        tracker::TrackerStore& tracker, std::uint64_t seed,
                        const EventObserver& observer = {});

/// Fraction of `ids` whose argmax prediction on the clean input is correct.
double accuracy(const nn::ModelParams& params, const data::Dataset& dataset,
                std::span<const int> ids);

/// Cycles through a pool in shuffled order, reshuffling at every pass.
class EpochSampler {
public:
    EpochSampler(std::vector<int> ids, std::uint64_t seed);

    int next();
    void fill(std::span<int> out);
    std::size_t passes() const { return passes_; }

private:
    void reshuffle();

    std::vector<int> ids_;
    Rng rng_;
    std::size_t pos_ = 0;
    std::size_t passes_ = 0;
};

}  // namespace assl::ssl
