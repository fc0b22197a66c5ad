#include "assl/analysis.hpp"

#include "assl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace assl::analysis {

SnapshotSeries::SnapshotSeries(std::vector<int> ids) : ids_(std::move(ids)) {}

void SnapshotSeries::add(std::uint64_t step, std::span<const int> labels,
                         std::span<const double> uncertainty, std::span<const double> max_prob) {
    if (labels.size() != ids_.size() || uncertainty.size() != ids_.size() ||
        max_prob.size() != ids_.size()) {
        throw InputError("snapshot is not aligned with the series ids");
    }
    steps_.push_back(step);
    labels_.insert(labels_.end(), labels.begin(), labels.end());
    uncertainty_.insert(uncertainty_.end(), uncertainty.begin(), uncertainty.end());
    max_prob_.insert(max_prob_.end(), max_prob.begin(), max_prob.end());
}

int SnapshotSeries::label(std::size_t snapshot, std::size_t sample) const {
    return labels_[snapshot * ids_.size() + sample];
}

double SnapshotSeries::uncertainty(std::size_t snapshot, std::size_t sample) const {
    return uncertainty_[snapshot * ids_.size() + sample];
}

double SnapshotSeries::max_prob(std::size_t snapshot, std::size_t sample) const {
    return max_prob_[snapshot * ids_.size() + sample];
}

std::vector<int> SnapshotSeries::labels_of(std::size_t sample) const {
    std::vector<int> out(num_snapshots());
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = label(s, sample);
    return out;
}

std::vector<double> SnapshotSeries::uncertainties_at(std::size_t snapshot) const {
    const auto first = uncertainty_.begin() + static_cast<std::ptrdiff_t>(snapshot * ids_.size());
    return {first, first + static_cast<std::ptrdiff_t>(ids_.size())};
}

int temporal_instability(std::span<const int> labels) {
    if (labels.empty()) throw InputError("temporal instability of an empty label sequence");
    int changes = 0;
    for (std::size_t t = 1; t < labels.size(); ++t) changes += labels[t] != labels[t - 1];
    return changes;
}

std::vector<double> fractional_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("spearman: inputs differ in length");
    if (a.size() < 2) throw InputError("spearman: need at least two observations");
    const auto ra = fractional_ranks(a);
    const auto rb = fractional_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;  // mean of fractional ranks is always (n+1)/2
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<SampleSummary> summarize(const SnapshotSeries& series, double threshold) {
    std::vector<SampleSummary> out;
    const std::size_t t = series.num_snapshots();
    if (t == 0) return out;
    out.reserve(series.num_samples());
    for (std::size_t i = 0; i < series.num_samples(); ++i) {
        SampleSummary s;
        s.sample_id = series.ids()[i];
        s.ti = temporal_instability(series.labels_of(i));
        double sum = 0.0;
        for (std::size_t k = 0; k < t; ++k) {
            sum += series.uncertainty(k, i);
            s.pseudo_count += series.max_prob(k, i) > threshold;
        }
        s.mean_uncertainty = sum / static_cast<double>(t);
        out.push_back(s);
    }
    return out;
}

std::vector<TiGroup> ti_uncertainty_profile(std::span<const SampleSummary> summaries) {
    std::map<int, std::vector<double>> groups;
    for (const auto& s : summaries) groups[s.ti].push_back(s.mean_uncertainty);
    std::vector<TiGroup> out;
    for (const auto& [ti, values] : groups) {
        TiGroup g;
        g.ti = ti;
        g.count = values.size();
        const double n = static_cast<double>(values.size());
        g.mean_u = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : values) ss += (v - g.mean_u) * (v - g.mean_u);
        g.std_u = std::sqrt(ss / n);
        out.push_back(g);
    }
    return out;
}

std::vector<TiGroup> ti_uncertainty_profile(const SnapshotSeries& series) {
    const auto summaries = summarize(series);
    return ti_uncertainty_profile(summaries);
}

std::optional<double> ti_uncertainty_correlation(std::span<const SampleSummary> summaries) {
    if (summaries.size() < 2) return std::nullopt;
    std::vector<double> ti, u;
    for (const auto& s : summaries) {
        ti.push_back(s.ti);
        u.push_back(s.mean_uncertainty);
    }
    return spearman(ti, u);
}

std::vector<std::optional<double>> consecutive_rank_correlations(const SnapshotSeries& series) {
    std::vector<std::optional<double>> out;
    if (series.num_samples() < 2) return out;
    for (std::size_t s = 1; s < series.num_snapshots(); ++s) {
        out.push_back(spearman(series.uncertainties_at(s - 1), series.uncertainties_at(s)));
    }
    return out;
}

double pseudo_labeled_ratio(const std::map<int, bool>& pseudo_labeled,
                            const std::map<int, double>& scores, double top_frac) {
    if (!(top_frac > 0.0 && top_frac <= 1.0)) throw InputError("top_frac must be in (0, 1]");
    std::vector<std::pair<int, double>> ranked;
    ranked.reserve(pseudo_labeled.size());
    for (const auto& [id, flag] : pseudo_labeled) {
        const auto it = scores.find(id);
        if (it == scores.end()) throw InputError("no score for sample " + std::to_string(id));
        ranked.emplace_back(id, it->second);
    }
    if (ranked.empty()) return 0.0;
    const auto top = static_cast<std::size_t>(
        std::ceil(top_frac * static_cast<double>(ranked.size()) - 1e-9));
    const std::size_t n = std::clamp<std::size_t>(top, 1, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end(),
                      [](const auto& a, const auto& b) {
                          return a.second != b.second ? a.second > b.second : a.first < b.first;
                      });
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < n; ++i) flagged += pseudo_labeled.at(ranked[i].first);
    return static_cast<double>(flagged) / static_cast<double>(n);
}

double pseudo_labeled_ratio(const SnapshotSeries& series, const std::map<int, double>& scores,
                            double top_frac, double threshold) {
    std::map<int, bool> flags;
    for (const auto& s : summarize(series, threshold)) flags[s.sample_id] = s.pseudo_count > 0;
    return pseudo_labeled_ratio(flags, scores, top_frac);
}

PairwiseMatrix pairwise_matrix(std::span<const StrategyResults> results) {
    PairwiseMatrix m;
    const std::size_t n = results.size();
    m.wins.assign(n, std::vector<int>(n, 0));
    m.column_means.assign(n, 0.0);
    for (const auto& r : results) m.strategies.push_back(r.strategy);
    if (n == 0) return m;

    const auto& reference = results.front().accuracy_by_setting;
    for (const auto& r : results) {
        if (r.accuracy_by_setting.size() != reference.size() ||
            !std::equal(r.accuracy_by_setting.begin(), r.accuracy_by_setting.end(),
                        reference.begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; })) {
            throw InputError("strategy '" + r.strategy + "' was evaluated on different settings");
        }
    }
    m.settings = reference.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            for (const auto& [setting, acc] : results[i].accuracy_by_setting) {
                if (acc > results[j].accuracy_by_setting.at(setting)) ++m.wins[i][j];
            }
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += m.wins[i][j];
        m.column_means[j] = sum / static_cast<double>(n);
    }
    return m;
}

}  // namespace assl::analysis
