#include "assl/error.hpp"
#include "assl/rng.hpp"
#include "assl/tracker.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace assl;
using tracker::EmaState;
using tracker::PredictionEvent;
using tracker::TrackerParams;
using tracker::TrackerStore;

TEST(Uncertainty, Examples) {
    EXPECT_EQ(tracker::uncertainty(std::vector<double>{0.0, 1.0, 0.0}), 0.0);
    EXPECT_NEAR(tracker::uncertainty(std::vector<double>{0.5, 0.5}), 0.70710678, 1e-8);
    EXPECT_NEAR(tracker::uncertainty(std::vector<double>{0.8, 0.2}), 0.28284271, 1e-8);
    for (int k = 2; k <= 10; ++k) {
        std::vector<double> p(k, 1.0 / k);
        EXPECT_NEAR(tracker::uncertainty(p), std::sqrt(1.0 - 1.0 / k), 1e-12);
    }
}

TEST(Uncertainty, TiesGoToLowestIndex) {
    EXPECT_EQ(tracker::argmax(std::vector<double>{0.4, 0.4, 0.2}), 0u);
    EXPECT_EQ(tracker::argmax(std::vector<double>{0.2, 0.4, 0.4}), 1u);
}

TEST(Uncertainty, BoundedBelowSqrt2) {
    Rng rng(1);
    std::gamma_distribution<double> g(0.3, 1.0);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> p(5);
        double s = 0.0;
        for (auto& v : p) s += v = g(rng) + 1e-300;
        for (auto& v : p) v /= s;
        const double u = tracker::uncertainty(p);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, std::sqrt(2.0));
    }
}

TEST(Inconsistency, Examples) {
    std::vector<double> p{0.9, 0.1}, q{0.1, 0.9};
    EXPECT_EQ(tracker::inconsistency(p, p), 0.0);
    EXPECT_NEAR(tracker::inconsistency(p, q), 0.8 * std::log(9.0), 1e-12);
    EXPECT_NEAR(tracker::inconsistency(p, q), 1.75778, 1e-5);
    EXPECT_DOUBLE_EQ(tracker::inconsistency(p, q), tracker::inconsistency(q, p));
}

TEST(Inconsistency, ZeroProbabilitiesAreFloored) {
    std::vector<double> p{1.0, 0.0}, q{0.0, 1.0};
    const double v = tracker::inconsistency(p, q);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, -std::log(1e-12) * (1.0 - 1e-12), 1e-6);
}

TEST(Ema, AlphaOneReplaces) {
    auto s = tracker::ema_update({0.3, 0.7, 4}, 2.5, 1.0);
    EXPECT_EQ(s.mean, 2.5);
    EXPECT_EQ(s.var, 0.0);
    EXPECT_EQ(s.count, 5u);
}

TEST(Ema, ConstantStreamClosedForm) {
    EmaState s;
    for (int t = 0; t < 3; ++t) s = tracker::ema_update(s, 1.0, 0.8);
    EXPECT_NEAR(s.mean, 0.992, 1e-12);
    EXPECT_NEAR(s.mean, 1.0 - std::pow(0.2, 3), 1e-15);
}

TEST(Ema, TwoStepStream) {
    auto s = tracker::ema_update({}, 1.0, 0.8);
    EXPECT_NEAR(s.mean, 0.8, 1e-12);
    EXPECT_NEAR(s.var, 0.032, 1e-12);
    s = tracker::ema_update(s, 0.0, 0.8);
    EXPECT_NEAR(s.mean, 0.16, 1e-12);
    EXPECT_NEAR(s.var, 0.026880, 1e-12);
}

TEST(Ema, PreUpdateVariantDiffers) {
    auto s = tracker::ema_update({}, 1.0, 0.8, tracker::VarianceOrder::PreUpdateMean);
    EXPECT_NEAR(s.mean, 0.8, 1e-12);
    EXPECT_NEAR(s.var, 0.8, 1e-12);  // 0.8 * (1 - 0)^2
}

TEST(Ema, NonFiniteRejected) {
    EXPECT_THROW(tracker::ema_update({}, std::nan(""), 0.8), TrackerError);
    EXPECT_THROW(tracker::ema_update({}, INFINITY, 0.8), TrackerError);
}

TEST(Ema, MonotoneResponse) {
    EmaState s{0.4, 0.01, 3};
    EXPECT_GT(tracker::ema_update(s, 0.41, 0.1).mean, s.mean);
}

TEST(Ucb, Examples) {
    EXPECT_EQ(tracker::ucb({0.5, 0.04, 1}, 0.0), 0.5);
    EXPECT_NEAR(tracker::ucb({0.5, 0.04, 1}, 0.5), 0.6, 1e-12);
    EXPECT_EQ(tracker::ucb({0.3, 0.0, 1}, 7.0), 0.3);
    EXPECT_EQ(tracker::ucb({0.3, -1e-18, 1}, 7.0), 0.3);
}

TEST(FinalScore, Examples) {
    EXPECT_NEAR(tracker::final_score(0.6, 0.5), 0.3, 1e-12);
    EXPECT_EQ(tracker::final_score(0.0, 123.0), 0.0);
    EXPECT_NEAR(tracker::final_score(0.70710678, 1.75778), 1.24293, 1e-5);
}

TEST(Store, UnknownIdRejected) {
    TrackerStore store(10, {});
    store.reset(std::vector<int>{1, 2});
    PredictionEvent e{5, 1, 0, {0.5, 0.5}, {0.5, 0.5}};
    EXPECT_THROW(store.ingest(e), TrackerError);
    EXPECT_THROW(store.stats(5), TrackerError);
}

TEST(Store, BadParamsRejected) {
    EXPECT_THROW(TrackerStore(4, TrackerParams{0.0, 0.5, 2.0}), ConfigError);
    EXPECT_THROW(TrackerStore(4, TrackerParams{0.8, -1.0, 2.0}), ConfigError);
}

TEST(Store, ConfidentConsistentEventsDecay) {
    TrackerStore store(4, {});
    store.reset(std::vector<int>{0, 1, 2, 3});
    PredictionEvent warm{2, 1, 0, {0.5, 0.5}, {0.9, 0.1}};
    store.ingest(warm);
    const double u0 = store.stats(2).uncertainty.mean, i0 = store.stats(2).inconsistency.mean;
    PredictionEvent e{2, 2, 1, {1.0, 0.0}, {1.0, 0.0}};
    for (int n = 0; n < 5; ++n) store.ingest(e);
    EXPECT_LT(store.stats(2).uncertainty.mean, u0 * 1e-3);
    EXPECT_LT(store.stats(2).inconsistency.mean, i0 * 1e-3);
    EXPECT_EQ(store.stats(2).uncertainty.count, 6u);
    EXPECT_EQ(store.stats(0).uncertainty.count, 0u);
}

TEST(Store, UcbNotBelowMean) {
    TrackerStore store(3, {});
    store.reset(std::vector<int>{0, 1, 2});
    Rng rng(8);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int n = 0; n < 200; ++n) {
        const double a = u(rng), b = u(rng);
        store.ingest({n % 3, 0, std::uint64_t(n), {a, 1 - a}, {b, 1 - b}});
    }
    for (int id = 0; id < 3; ++id) {
        EXPECT_GE(store.uncertainty_ucb(id), store.stats(id).uncertainty.mean);
        EXPECT_GE(store.inconsistency_ucb(id), store.stats(id).inconsistency.mean);
        EXPECT_DOUBLE_EQ(store.score(id), store.uncertainty_ucb(id) * store.inconsistency_ucb(id));
    }
}

// Event log round trip then an independent replay of the recurrences.
struct Replay {
    double um = 0, uv = 0, im = 0, iv = 0;
    int count = 0;
};

TEST(Store, MatchesLogReplayOracle) {
    const double alpha = 0.8;
    TrackerStore store(50, TrackerParams{alpha, 0.5, 2.0});
    std::vector<int> ids;
    for (int i = 0; i < 50; ++i) ids.push_back(i);
    store.reset(ids);

    Rng rng(42);
    std::gamma_distribution<double> g(0.5, 1.0);
    std::uniform_int_distribution<int> pick(0, 49);
    auto draw = [&](int k) {
        std::vector<double> p(k);
        double s = 0.0;
        for (auto& v : p) s += v = g(rng) + 1e-9;
        for (auto& v : p) v /= s;
        return p;
    };

    std::ostringstream log;
    log << "round,step,sample_id,probs_w0,probs_w1,probs_w2,probs_s0,probs_s1,probs_s2\n";
    char buf[64];
    for (int step = 0; step < 4000; ++step) {
        PredictionEvent e;
        e.sample_id = pick(rng);
        e.global_step = step;
        e.probs_weak = draw(3);
        e.probs_strong = draw(3);
        store.ingest(e);
        log << 0 << ',' << step << ',' << e.sample_id;
        for (const auto* v : {&e.probs_weak, &e.probs_strong})
            for (double p : *v) {
                std::snprintf(buf, sizeof buf, "%.17g", p);
                log << ',' << buf;
            }
        log << '\n';
    }

    std::map<int, Replay> oracle;
    std::istringstream in(log.str());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> f;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(std::stod(cell));
        const int id = static_cast<int>(f[2]);
        const double* w = &f[3];
        const double* s = &f[6];
        int top = 0;
        for (int c = 1; c < 3; ++c)
            if (w[c] > w[top]) top = c;
        double u2 = 0.0, kl = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double d = w[c] - (c == top ? 1.0 : 0.0);
            u2 += d * d;
            const double a = std::max(w[c], 1e-12), b = std::max(s[c], 1e-12);
            kl += 0.5 * (a * std::log(a / b) + b * std::log(b / a));
        }
        const double u = std::sqrt(u2);
        auto& r = oracle[id];
        r.um = alpha * u + (1 - alpha) * r.um;
        r.uv = alpha * (u - r.um) * (u - r.um) + (1 - alpha) * r.uv;
        r.im = alpha * kl + (1 - alpha) * r.im;
        r.iv = alpha * (kl - r.im) * (kl - r.im) + (1 - alpha) * r.iv;
        ++r.count;
    }

    for (const auto& [id, r] : oracle) {
        const auto& st = store.stats(id);
        EXPECT_NEAR(st.uncertainty.mean, r.um, 1e-12);
        EXPECT_NEAR(st.uncertainty.var, r.uv, 1e-12);
        EXPECT_NEAR(st.inconsistency.mean, r.im, 1e-12);
        EXPECT_NEAR(st.inconsistency.var, r.iv, 1e-12);
        EXPECT_EQ(st.uncertainty.count, static_cast<std::uint64_t>(r.count));
        const double score = (r.um + 0.5 * std::sqrt(r.uv)) * (r.im + 2.0 * std::sqrt(r.iv));
        EXPECT_NEAR(store.score(id), score, 1e-12 * std::max(1.0, score));
        EXPECT_EQ(store.score(id), store.row(id).score);
    }

    // removing and re-adding a sample clears its cached score with the rest
    const std::vector<int> gone{3};
    store.remove(gone);
    EXPECT_FALSE(store.contains(3));
    store.reset(ids);
    EXPECT_EQ(store.score(3), 0.0);
}

TEST(Store, ScoresCsvLayout) {
    TrackerStore store(3, {});
    store.reset(std::vector<int>{0, 2});
    store.ingest({2, 1, 0, {0.8, 0.2}, {0.6, 0.4}});
    std::ostringstream out;
    auto rows = store.snapshot();
    tracker::write_scores_csv(rows, out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "sample_id,u_mean,u_var,u_ucb,i_mean,i_var,i_ucb,score");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].sample_id, 0);
    EXPECT_EQ(rows[1].sample_id, 2);
    EXPECT_NEAR(rows[1].u_mean, 0.8 * 0.28284271247461906, 1e-15);
}

}  // namespace
