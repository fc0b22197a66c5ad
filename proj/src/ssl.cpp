#include "assl/ssl.hpp"

#include "assl/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace assl::ssl {

std::string_view to_string(InitMode mode) {
    return mode == InitMode::RandInit ? "randinit" : "coninit";
}

InitMode parse_init_mode(std::string_view name) {
    if (name == "randinit" || name == "RandInit") return InitMode::RandInit;
    if (name == "coninit" || name == "ConInit") return InitMode::ConInit;
    throw ConfigError("unknown init mode '" + std::string(name) + "'");
}

void SslConfig::validate() const {
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (labeled_batch < 1) throw ConfigError("labeled batch size must be >= 1");
    if (unlabeled_ratio < 1) throw ConfigError("unlabeled ratio mu must be >= 1");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold tau must be in (0, 1]");
    if (!(unsup_weight >= 0.0)) throw ConfigError("unsupervised weight must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    if (snapshot_interval < 1) throw ConfigError("snapshot interval must be >= 1");
    if (weak.sigma < 0.0 || strong.sigma < 0.0) throw ConfigError("augmentation sigma must be >= 0");
    if (strong.scale_min > strong.scale_max || strong.scale_min < 0.0) {
        throw ConfigError("invalid strong scaling range");
    }
    if (strong.drop_prob < 0.0 || strong.drop_prob > 1.0) {
        throw ConfigError("drop probability must be in [0, 1]");
    }
}

std::optional<std::size_t> pseudo_label(std::span<const double> probs_weak, double threshold) {
    const std::size_t top = tracker::argmax(probs_weak);
    if (probs_weak[top] > threshold) return top;
    return std::nullopt;
}

EpochSampler::EpochSampler(std::vector<int> ids, std::uint64_t seed)
    : ids_(std::move(ids)), rng_(seed) {
    if (ids_.empty()) throw InputError("cannot sample from an empty pool");
    reshuffle();
}

void EpochSampler::reshuffle() {
    std::shuffle(ids_.begin(), ids_.end(), rng_);
    pos_ = 0;
}

int EpochSampler::next() {
    if (pos_ == ids_.size()) {
        ++passes_;
        reshuffle();
    }
    return ids_[pos_++];
}

void EpochSampler::fill(std::span<int> out) {
    for (int& id : out) id = next();
}

double accuracy(const nn::ModelParams& params, const data::Dataset& dataset,
                std::span<const int> ids) {
    if (ids.empty()) return 0.0;
    nn::Trace trace;
    std::size_t correct = 0;
    for (int id : ids) {
        const auto& s = dataset.at(id);
        nn::forward_trace(params, s.x, trace);
        correct += static_cast<int>(tracker::argmax(trace.probs)) == s.y;
    }
    return static_cast<double>(correct) / static_cast<double>(ids.size());
}

RoundResult train_round(nn::ModelParams params, const data::SamplePools& pools,
                        const data::Dataset& dataset, const SslConfig& cfg,
                        tracker::TrackerStore& tracker, std::uint64_t seed,
                        const EventObserver& observer) {
    cfg.validate();
    params.validate();
    if (pools.labeled.empty()) throw ConfigError("labeled pool is empty");
    if (pools.unlabeled.empty()) throw ConfigError("unlabeled pool is empty");
    const std::size_t B = cfg.labeled_batch;
    const std::size_t UB = cfg.unlabeled_batch();
    if (pools.unlabeled.size() < UB) {
        throw ConfigError("unlabeled pool (" + std::to_string(pools.unlabeled.size()) +
                          ") is smaller than mu * B (" + std::to_string(UB) + ")");
    }
    if (cfg.steps * UB < pools.unlabeled.size()) {
        throw ConfigError("steps * mu * B does not cover the unlabeled pool once");
    }
    if (tracker.size() == 0) tracker.reset(pools.unlabeled);
    for (int id : pools.unlabeled) {
        if (!tracker.contains(id)) {
            throw ConfigError("tracker does not cover unlabeled sample " + std::to_string(id));
        }
    }

    const std::size_t k = params.num_classes();
    if (dataset.num_classes() > k) throw ConfigError("model has fewer outputs than classes");
    std::vector<std::vector<double>> one_hot(k, std::vector<double>(k, 0.0));
    for (std::size_t c = 0; c < k; ++c) one_hot[c][c] = 1.0;

    EpochSampler labeled_order(pools.labeled, derive_seed(seed, "labeled", 0));
    Rng labeled_aug = make_rng(derive_seed(seed, "labeled", 1));
    EpochSampler unlabeled_order(pools.unlabeled, derive_seed(seed, "unlabeled", 0));
    Rng unlabeled_aug = make_rng(derive_seed(seed, "unlabeled", 1));

    nn::SgdOptimizer optimizer(cfg.lr, cfg.momentum);
    nn::Gradients grads = nn::Gradients::zeros_like(params);
    nn::Trace trace_l, trace_w, trace_s;
    std::vector<double> view, view_w, view_s;
    std::vector<int> batch_l(B), batch_u(UB);
    tracker::PredictionEvent event;

    RoundResult result;
    result.snapshots = analysis::SnapshotSeries(pools.unlabeled);
    std::vector<int> snap_labels(pools.unlabeled.size());
    std::vector<double> snap_u(pools.unlabeled.size()), snap_max(pools.unlabeled.size());

    const double sup_scale = 1.0 / static_cast<double>(B);
    const double unsup_scale = cfg.unsup_weight / static_cast<double>(UB);
    double sup_total = 0.0, unsup_total = 0.0;
    std::size_t masked = 0;

    for (std::size_t step = 0; step < cfg.steps; ++step) {
        for (auto& layer : grads.layers) {
            std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
            std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
        }

        double sup_loss = 0.0;
        labeled_order.fill(batch_l);
        for (int id : batch_l) {
            const auto& s = dataset.at(id);
            if (cfg.augment_labeled) data::augment_weak(s.x, cfg.weak, labeled_aug, view);
            else view.assign(s.x.begin(), s.x.end());
            nn::forward_trace(params, view, trace_l);
            sup_loss += nn::accumulate_gradients(params, trace_l, one_hot[static_cast<std::size_t>(s.y)],
                                                 sup_scale, grads);
        }
        sup_loss *= sup_scale;

        double unsup_loss = 0.0;
        unlabeled_order.fill(batch_u);
        for (int id : batch_u) {
            const auto& s = dataset.at(id);
            data::augment_weak(s.x, cfg.weak, unlabeled_aug, view_w);
            data::augment_strong(s.x, cfg.strong, unlabeled_aug, view_s);
            nn::forward_trace(params, view_w, trace_w);
            nn::forward_trace(params, view_s, trace_s);

            event.sample_id = id;
            event.appearance = tracker.stats(id).uncertainty.count + 1;
            event.global_step = step;
            event.probs_weak = trace_w.probs;
            event.probs_strong = trace_s.probs;
            tracker.ingest(event);
            if (observer) observer(event);

            if (const auto label = pseudo_label(trace_w.probs, cfg.threshold)) {
                ++masked;
                const auto& target = one_hot[*label];
                unsup_loss += cfg.unsup_weight != 0.0
                                  ? nn::accumulate_gradients(params, trace_s, target, unsup_scale, grads)
                                  : nn::cross_entropy(trace_s, target);
            }
        }
        unsup_loss /= static_cast<double>(UB);

        const double loss = sup_loss + cfg.unsup_weight * unsup_loss;
        if (!std::isfinite(loss)) throw TrainingError("non-finite loss", static_cast<long>(step));
        optimizer.step(params, grads);
        if (!params.all_finite()) {
            throw TrainingError("non-finite parameters after update", static_cast<long>(step));
        }
        sup_total += sup_loss;
        unsup_total += unsup_loss;

        if ((step + 1) % cfg.snapshot_interval == 0) {
            for (std::size_t i = 0; i < pools.unlabeled.size(); ++i) {
                nn::forward_trace(params, dataset.at(pools.unlabeled[i]).x, trace_w);
                const std::size_t top = tracker::argmax(trace_w.probs);
                snap_labels[i] = static_cast<int>(top);
                snap_u[i] = tracker::uncertainty(trace_w.probs);
                snap_max[i] = trace_w.probs[top];
            }
            result.snapshots.add(step + 1, snap_labels, snap_u, snap_max);
        }
    }

    const double steps = static_cast<double>(cfg.steps);
    result.metrics.steps = cfg.steps;
    result.metrics.mean_sup_loss = sup_total / steps;
    result.metrics.mean_unsup_loss = unsup_total / steps;
    result.metrics.mask_rate = static_cast<double>(masked) / (steps * static_cast<double>(UB));
    result.metrics.test_accuracy = accuracy(params, dataset, pools.test);
    result.params = std::move(params);
    return result;
}

}  // namespace assl::ssl
