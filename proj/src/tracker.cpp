#include "assl/tracker.hpp"

#include "assl/csv.hpp"
#include "assl/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace assl::tracker {

std::size_t argmax(std::span<const double> probs) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c) {
        if (probs[c] > probs[best]) best = c;
    }
    return best;
}

double uncertainty(std::span<const double> probs) {
    const std::size_t top = argmax(probs);
    double sum = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        const double d = c == top ? 1.0 - probs[c] : probs[c];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double inconsistency(std::span<const double> probs_weak, std::span<const double> probs_strong) {
    if (probs_weak.size() != probs_strong.size()) {
        throw InputError("inconsistency: distributions differ in length");
    }
    double kl_ws = 0.0;
    double kl_sw = 0.0;
    for (std::size_t c = 0; c < probs_weak.size(); ++c) {
        const double p = std::max(probs_weak[c], kProbabilityFloor);
        const double q = std::max(probs_strong[c], kProbabilityFloor);
        const double log_ratio = std::log(p) - std::log(q);
        kl_ws += p * log_ratio;
        kl_sw -= q * log_ratio;
    }
    return 0.5 * (kl_ws + kl_sw);
}

EmaState ema_update(const EmaState& state, double value, double alpha, VarianceOrder order) {
    if (!std::isfinite(value)) throw TrackerError("non-finite score value");
    EmaState next;
    next.mean = alpha * value + (1.0 - alpha) * state.mean;
    const double centre = order == VarianceOrder::PostUpdateMean ? next.mean : state.mean;
    const double dev = value - centre;
    next.var = alpha * dev * dev + (1.0 - alpha) * state.var;
    next.count = state.count + 1;
    return next;
}

double ucb(const EmaState& state, double c) {
    return state.mean + c * std::sqrt(std::max(state.var, 0.0));
}

TrackerStore::TrackerStore(std::size_t capacity, TrackerParams params)
    : params_(params), stats_(capacity), score_(capacity, 0.0), present_(capacity, 0) {
    if (!(params.alpha > 0.0 && params.alpha <= 1.0)) {
        throw ConfigError("EMA rate alpha must be in (0, 1]");
    }
    if (params.c_u < 0.0 || params.c_i < 0.0) throw ConfigError("UCB constants must be >= 0");
}

void TrackerStore::reset(std::span<const int> ids) {
    std::fill(present_.begin(), present_.end(), 0);
    std::fill(stats_.begin(), stats_.end(), SampleStats{});
    std::fill(score_.begin(), score_.end(), 0.0);
    size_ = 0;
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= present_.size()) {
            throw TrackerError("sample " + std::to_string(id) + " outside tracker capacity");
        }
        if (!present_[static_cast<std::size_t>(id)]) {
            present_[static_cast<std::size_t>(id)] = kTracked;
            ++size_;
        }
    }
}

void TrackerStore::remove(std::span<const int> ids) {
    for (int id : ids) {
        if (contains(id)) {
            present_[static_cast<std::size_t>(id)] = 0;
            stats_[static_cast<std::size_t>(id)] = SampleStats{};
            score_[static_cast<std::size_t>(id)] = 0.0;
            --size_;
        }
    }
}

bool TrackerStore::contains(int id) const {
    return id >= 0 && static_cast<std::size_t>(id) < present_.size() &&
           present_[static_cast<std::size_t>(id)];
}

std::vector<int> TrackerStore::ids() const {
    std::vector<int> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < present_.size(); ++i) {
        if (present_[i]) out.push_back(static_cast<int>(i));
    }
    return out;
}

const SampleStats& TrackerStore::stats(int id) const {
    if (!contains(id)) throw TrackerError("sample " + std::to_string(id) + " is not tracked");
    return stats_[static_cast<std::size_t>(id)];
}

void TrackerStore::ingest(const PredictionEvent& event) {
    if (!contains(event.sample_id)) {
        throw TrackerError("event for untracked sample " + std::to_string(event.sample_id));
    }
    const auto slot = static_cast<std::size_t>(event.sample_id);
    SampleStats& s = stats_[slot];
    try {
        const double u = uncertainty(event.probs_weak);
        const double i = inconsistency(event.probs_weak, event.probs_strong);
        const EmaState nu = ema_update(s.uncertainty, u, params_.alpha, params_.order);
        const EmaState ni = ema_update(s.inconsistency, i, params_.alpha, params_.order);
        s.uncertainty = nu;
        s.inconsistency = ni;
        score_[slot] = final_score(ucb(nu, params_.c_u), ucb(ni, params_.c_i));
        present_[slot] = kObserved;
    } catch (const Error& e) {
        throw TrackerError("sample " + std::to_string(event.sample_id) + ": " + e.what());
    }
}

double TrackerStore::uncertainty_ucb(int id) const {
    return ucb(stats(id).uncertainty, params_.c_u);
}

double TrackerStore::inconsistency_ucb(int id) const {
    return ucb(stats(id).inconsistency, params_.c_i);
}

double TrackerStore::score(int id) const {
    if (!contains(id)) throw TrackerError("sample " + std::to_string(id) + " is not tracked");
    return score_[static_cast<std::size_t>(id)];
}

ScoreRow TrackerStore::row(int id) const {
    const SampleStats& s = stats(id);
    ScoreRow r;
    r.sample_id = id;
    r.u_mean = s.uncertainty.mean;
    r.u_var = s.uncertainty.var;
    r.u_ucb = ucb(s.uncertainty, params_.c_u);
    r.i_mean = s.inconsistency.mean;
    r.i_var = s.inconsistency.var;
    r.i_ucb = ucb(s.inconsistency, params_.c_i);
    r.score = final_score(r.u_ucb, r.i_ucb);
    r.count = s.uncertainty.count;
    return r;
}

std::vector<ScoreRow> TrackerStore::snapshot() const {
    std::vector<ScoreRow> rows;
    rows.reserve(size_);
    for (std::size_t i = 0; i < present_.size(); ++i) {
        if (present_[i]) rows.push_back(row(static_cast<int>(i)));
    }
    return rows;
}

void write_scores_csv(std::span<const ScoreRow> rows, std::ostream& out) {
    out << "sample_id,u_mean,u_var,u_ucb,i_mean,i_var,i_ucb,score\n";
    for (const auto& r : rows) {
        out << r.sample_id << ',' << csv::real(r.u_mean) << ',' << csv::real(r.u_var) << ','
            << csv::real(r.u_ucb) << ',' << csv::real(r.i_mean) << ',' << csv::real(r.i_var) << ','
            << csv::real(r.i_ucb) << ',' << csv::real(r.score) << '\n';
    }
}

}  // namespace assl::tracker
