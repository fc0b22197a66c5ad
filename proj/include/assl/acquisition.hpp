#pragma once

#include "assl/data.hpp"
#include "assl/nn.hpp"
#include "assl/rng.hpp"
#include "assl/tracker.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace assl::acquisition {

enum class Strategy { Ours, OursDiv, Random, Entropy, Margin, SnapshotEl2n, Coreset };

std::string_view to_string(Strategy s);
/// "ours", "ours-div", "random", "entropy", "margin", "snapshot-el2n", "coreset".
Strategy parse_strategy(std::string_view name);
std::vector<Strategy> all_strategies();

/// Selected ids in selection order with the score each was selected by.
struct Selection {
    std::vector<int> ids;
    std::vector<double> scores;
};

/// Top-K ids by descending score; equal scores resolve to the lower id.
Selection top_k(std::span<const int> ids, std::span<const double> scores, std::size_t k);

/// Penultimate-layer features, one row per dataset id (rows for ids that were
/// never computed are zero).
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t rows, std::size_t dim) : dim_(dim), data_(rows * dim, 0.0) {}

    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return dim_ ? data_.size() / dim_ : 0; }
    std::span<const double> row(int id) const;
    std::span<double> row(int id);

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

EmbeddingTable compute_embeddings(const nn::ModelParams& params, const data::Dataset& dataset,
                                  std::span<const int> ids);

/// Shannon entropy, natural log; 0 log 0 = 0.
double entropy(std::span<const double> probs);
/// Difference between the largest and second-largest probability.
double margin(std::span<const double> probs);

/// The UCB product score from the tracker; performs no inference. Throws
/// AcquisitionError if any unlabeled id was never observed during training.
Selection acquire_topk_score(const tracker::TrackerStore& tracker, std::span<const int> unlabeled,
                             std::size_t k);

enum class DiverseMode { SeedingOnly, Lloyd };

struct DiverseOptions {
    DiverseMode mode = DiverseMode::Lloyd;
    std::size_t max_iterations = 100;
    double tolerance = 1e-8;  // largest centroid shift
};

/// Clusters score-weighted embeddings (score_i * emb_i) with k-means++ seeding
/// followed by Lloyd iterations, then returns the sample closest to each
/// centroid. Duplicates are replaced by each centroid's next-nearest unused
/// samples, visiting centroids in order. Scores are the tracker scores.
Selection acquire_diverse(std::span<const int> unlabeled, std::span<const double> scores,
                          const EmbeddingTable& embeddings, std::size_t k, Rng& rng,
                          const DiverseOptions& options = {});
Selection acquire_diverse(const tracker::TrackerStore& tracker, std::span<const int> unlabeled,
                          const EmbeddingTable& embeddings, std::size_t k, Rng& rng,
                          const DiverseOptions& options = {});

/// Uniform without replacement.
Selection acquire_random(std::span<const int> unlabeled, std::size_t k, Rng& rng);

/// Fresh inference on clean inputs, top-K entropy.
Selection acquire_entropy(const nn::ModelParams& params, const data::Dataset& dataset,
                          std::span<const int> unlabeled, std::size_t k);

/// Fresh inference, K smallest top-2 margins. Reported scores are margins.
Selection acquire_margin(const nn::ModelParams& params, const data::Dataset& dataset,
                         std::span<const int> unlabeled, std::size_t k);

/// Fresh inference, top-K pseudo-EL2N at the end of training.
Selection acquire_snapshot_el2n(const nn::ModelParams& params, const data::Dataset& dataset,
                                std::span<const int> unlabeled, std::size_t k);

/// Greedy k-center: repeatedly takes the unlabeled sample farthest (in
/// Euclidean embedding distance) from the labeled set and earlier picks.
/// Reported scores are those distances.
Selection acquire_coreset(const EmbeddingTable& embeddings, std::span<const int> labeled,
                          std::span<const int> unlabeled, std::size_t k);

}  // namespace assl::acquisition
