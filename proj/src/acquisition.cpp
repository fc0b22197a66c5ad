#include "assl/acquisition.hpp"

#include "assl/error.hpp"
#include "assl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace assl::acquisition {
namespace {

void check_k(std::size_t k, std::size_t pool) {
    if (k < 1) throw InputError("K must be at least 1");
    if (k > pool) {
        throw InputError("K (" + std::to_string(k) + ") exceeds the unlabeled pool (" +
                         std::to_string(pool) + ")");
    }
}

template <class Metric>
Selection infer_and_rank(const nn::ModelParams& params, const data::Dataset& dataset,
                         std::span<const int> unlabeled, std::size_t k, Metric metric) {
    check_k(k, unlabeled.size());
    std::vector<double> scores;
    scores.reserve(unlabeled.size());
    nn::Trace trace;
    for (int id : unlabeled) {
        nn::forward_trace(params, dataset.at(id).x, trace);
        scores.push_back(metric(std::span<const double>(trace.probs)));
    }
    return top_k(unlabeled, scores, k);
}

}  // namespace

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Ours: return "ours";
        case Strategy::OursDiv: return "ours-div";
        case Strategy::Random: return "random";
        case Strategy::Entropy: return "entropy";
        case Strategy::Margin: return "margin";
        case Strategy::SnapshotEl2n: return "snapshot-el2n";
        case Strategy::Coreset: return "coreset";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    for (Strategy s : all_strategies()) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

std::vector<Strategy> all_strategies() {
    return {Strategy::Ours,   Strategy::OursDiv,      Strategy::Random, Strategy::Entropy,
            Strategy::Margin, Strategy::SnapshotEl2n, Strategy::Coreset};
}

namespace {

// Keeps the k best (score, id) pairs seen so far: highest score first, ties
// to the smaller id. One pass, O(n log k).
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

    void push(double score, int id) {
        const Entry e{score, id};
        if (heap_.size() < k_) {
            heap_.push_back(e);
            std::push_heap(heap_.begin(), heap_.end(), before);
        } else if (before(e, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), before);
            heap_.back() = e;
            std::push_heap(heap_.begin(), heap_.end(), before);
        }
    }

    Selection take() {
        std::sort_heap(heap_.begin(), heap_.end(), before);
        Selection sel;
        sel.ids.reserve(heap_.size());
        sel.scores.reserve(heap_.size());
        for (const auto& e : heap_) {
            sel.ids.push_back(e.id);
            sel.scores.push_back(e.score);
        }
        return sel;
    }

private:
    struct Entry {
        double score;
        int id;
    };
    static bool before(const Entry& a, const Entry& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    }
    std::size_t k_;
    std::vector<Entry> heap_;
};

}  // namespace

Selection top_k(std::span<const int> ids, std::span<const double> scores, std::size_t k) {
    if (ids.size() != scores.size()) throw InputError("ids and scores differ in length");
    check_k(k, ids.size());
    TopK best(k);
    for (std::size_t i = 0; i < ids.size(); ++i) best.push(scores[i], ids[i]);
    return best.take();
}

std::span<const double> EmbeddingTable::row(int id) const {
    return {data_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

std::span<double> EmbeddingTable::row(int id) {
    return {data_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

EmbeddingTable compute_embeddings(const nn::ModelParams& params, const data::Dataset& dataset,
                                  std::span<const int> ids) {
    EmbeddingTable table(dataset.size(), params.embedding_dim());
    nn::Trace trace;
    for (int id : ids) {
        nn::forward_trace(params, dataset.at(id).x, trace);
        const auto emb = trace.embedding();
        std::copy(emb.begin(), emb.end(), table.row(id).begin());
    }
    return table;
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double margin(std::span<const double> probs) {
    double first = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    for (double p : probs) {
        if (p > first) {
            second = first;
            first = p;
        } else if (p > second) {
            second = p;
        }
    }
    return probs.size() < 2 ? first : first - second;
}

Selection acquire_topk_score(const tracker::TrackerStore& tracker, std::span<const int> unlabeled,
                             std::size_t k) {
    check_k(k, unlabeled.size());
    TopK best(k);
    for (int id : unlabeled) {
        if (!tracker.observed(id)) {
            throw AcquisitionError("sample " + std::to_string(id) +
                                   " has no observations; training did not cover the pool");
        }
        best.push(tracker.score(id), id);
    }
    return best.take();
}

Selection acquire_diverse(std::span<const int> unlabeled, std::span<const double> scores,
                          const EmbeddingTable& embeddings, std::size_t k, Rng& rng,
                          const DiverseOptions& options) {
    if (scores.size() != unlabeled.size()) throw InputError("ids and scores differ in length");
    check_k(k, unlabeled.size());
    const std::size_t n = unlabeled.size();
    const std::size_t d = embeddings.dim();
    const auto& kern = kernels::active();

    std::vector<double> points(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto emb = embeddings.row(unlabeled[i]);
        for (std::size_t j = 0; j < d; ++j) points[i * d + j] = scores[i] * emb[j];
    }
    auto point = [&](std::size_t i) { return points.data() + i * d; };

    // k-means++ seeding: D^2-proportional sampling.
    std::vector<double> centers;
    centers.reserve(k * d);
    std::vector<char> seeded(n, 0);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    auto add_center = [&](std::size_t idx) {
        seeded[idx] = 1;
        centers.insert(centers.end(), point(idx), point(idx) + d);
        const double* c = point(idx);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], kern.sq_dist(point(i), c, d));
    };
    add_center(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    while (centers.size() < k * d) {
        const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = u * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (nearest[i] <= 0.0) continue;
                acc += nearest[i];
                pick = i;
                if (acc > target) break;
            }
        } else {
            // Every point coincides with a seed: take a uniformly random unseeded one.
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i)
                if (!seeded[i]) free.push_back(i);
            pick = free[std::min(free.size() - 1, static_cast<std::size_t>(u * static_cast<double>(free.size())))];
        }
        add_center(pick);
    }

    auto center = [&](std::size_t c) { return centers.data() + c * d; };
    if (options.mode == DiverseMode::Lloyd) {
        std::vector<std::size_t> assign(n, k), prev(n, k);
        std::vector<double> sums(k * d);
        std::vector<std::size_t> counts(k);
        for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
            for (std::size_t i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < k; ++c) {
                    const double dist = kern.sq_dist(point(i), center(c), d);
                    if (dist < best) {
                        best = dist;
                        assign[i] = c;
                    }
                }
            }
            if (iter > 0 && assign == prev) break;
            prev = assign;

            std::fill(sums.begin(), sums.end(), 0.0);
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i = 0; i < n; ++i) {
                ++counts[assign[i]];
                kern.axpy(1.0, point(i), sums.data() + assign[i] * d, d);
            }
            double shift = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] == 0) continue;  // empty cluster keeps its centroid
                double* ctr = center(c);
                double moved = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double v = sums[c * d + j] / static_cast<double>(counts[c]);
                    moved += (v - ctr[j]) * (v - ctr[j]);
                    ctr[j] = v;
                }
                shift = std::max(shift, std::sqrt(moved));
            }
            if (shift < options.tolerance) break;
        }
    }

    // Centroid -> nearest samples, with dedup-and-fill in centroid order.
    std::vector<std::vector<std::size_t>> by_distance(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> dist(n);
        for (std::size_t i = 0; i < n; ++i) dist[i] = kern.sq_dist(point(i), center(c), d);
        auto& order = by_distance[c];
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dist[a] != dist[b] ? dist[a] < dist[b] : unlabeled[a] < unlabeled[b];
        });
    }
    Selection sel;
    std::vector<char> used(n, 0);
    std::vector<std::size_t> cursor(k, 0);
    auto take = [&](std::size_t i) {
        used[i] = 1;
        sel.ids.push_back(unlabeled[i]);
        sel.scores.push_back(scores[i]);
    };
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t best = by_distance[c][0];
        if (!used[best]) take(best);
    }
    while (sel.ids.size() < k) {
        for (std::size_t c = 0; c < k && sel.ids.size() < k; ++c) {
            auto& pos = cursor[c];
            while (pos < n && used[by_distance[c][pos]]) ++pos;
            if (pos < n) take(by_distance[c][pos]);
        }
    }
    return sel;
}

Selection acquire_diverse(const tracker::TrackerStore& tracker, std::span<const int> unlabeled,
                          const EmbeddingTable& embeddings, std::size_t k, Rng& rng,
                          const DiverseOptions& options) {
    std::vector<double> scores(unlabeled.size());
    for (std::size_t i = 0; i < unlabeled.size(); ++i) {
        if (!tracker.contains(unlabeled[i]) || tracker.stats(unlabeled[i]).uncertainty.count == 0) {
            throw AcquisitionError("sample " + std::to_string(unlabeled[i]) + " has no observations");
        }
        scores[i] = tracker.score(unlabeled[i]);
    }
    return acquire_diverse(unlabeled, scores, embeddings, k, rng, options);
}

Selection acquire_random(std::span<const int> unlabeled, std::size_t k, Rng& rng) {
    check_k(k, unlabeled.size());
    std::vector<int> pool(unlabeled.begin(), unlabeled.end());
    Selection sel;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(i, pool.size() - 1)(rng);
        std::swap(pool[i], pool[j]);
        sel.ids.push_back(pool[i]);
        sel.scores.push_back(0.0);
    }
    return sel;
}

Selection acquire_entropy(const nn::ModelParams& params, const data::Dataset& dataset,
                          std::span<const int> unlabeled, std::size_t k) {
    return infer_and_rank(params, dataset, unlabeled, k, entropy);
}

Selection acquire_margin(const nn::ModelParams& params, const data::Dataset& dataset,
                         std::span<const int> unlabeled, std::size_t k) {
    Selection sel = infer_and_rank(params, dataset, unlabeled, k,
                                   [](std::span<const double> p) { return -margin(p); });
    for (double& s : sel.scores) s = -s;
    return sel;
}

Selection acquire_snapshot_el2n(const nn::ModelParams& params, const data::Dataset& dataset,
                                std::span<const int> unlabeled, std::size_t k) {
    return infer_and_rank(params, dataset, unlabeled, k,
                          [](std::span<const double> p) { return tracker::uncertainty(p); });
}

Selection acquire_coreset(const EmbeddingTable& embeddings, std::span<const int> labeled,
                          std::span<const int> unlabeled, std::size_t k) {
    check_k(k, unlabeled.size());
    const auto& kern = kernels::active();
    const std::size_t d = embeddings.dim();
    const std::size_t n = unlabeled.size();
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
    auto relax = [&](int center) {
        const double* c = embeddings.row(center).data();
        for (std::size_t i = 0; i < n; ++i) {
            min_sq[i] = std::min(min_sq[i], kern.sq_dist(embeddings.row(unlabeled[i]).data(), c, d));
        }
    };
    for (int id : labeled) relax(id);

    Selection sel;
    std::vector<char> picked(n, 0);
    for (std::size_t round = 0; round < k; ++round) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (picked[i]) continue;
            if (best == n || min_sq[i] > min_sq[best] ||
                (min_sq[i] == min_sq[best] && unlabeled[i] < unlabeled[best])) {
                best = i;
            }
        }
        picked[best] = 1;
        sel.ids.push_back(unlabeled[best]);
        sel.scores.push_back(std::sqrt(min_sq[best]));
        relax(unlabeled[best]);
    }
    return sel;
}

}  // namespace assl::acquisition
