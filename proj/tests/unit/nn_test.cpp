#include "assl/error.hpp"
#include "assl/gradcheck.hpp"
#include "assl/nn.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace {

using namespace assl;
using nn::Example;
using nn::ModelParams;

// Deliberately plain re-implementation used as the oracle. Shares nothing with src/nn.cpp.
double naive_loss(const ModelParams& p, const nn::GradCheckInstance& inst) {
    double total = 0.0;
    for (std::size_t b = 0; b < inst.inputs.size(); ++b) {
        std::vector<double> a = inst.inputs[b];
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            const auto& L = p.layers[l];
            std::vector<double> z(L.out);
            for (std::size_t r = 0; r < L.out; ++r) {
                long double s = L.bias[r];
                for (std::size_t c = 0; c < L.in; ++c) s += (long double)L.weight[r * L.in + c] * a[c];
                z[r] = (double)s;
            }
            if (l + 1 < p.layers.size())
                for (auto& v : z) v = v > 0.0 ? v : 0.0;
            a = z;
        }
        const double m = *std::max_element(a.begin(), a.end());
        long double se = 0.0;
        for (double v : a) se += std::exp((long double)(v - m));
        const double lse = m + (double)std::log(se);
        double ce = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) ce -= inst.targets[b][c] * (a[c] - lse);
        total += inst.weights[b] * ce;
    }
    return total / static_cast<double>(inst.inputs.size());
}

nn::Gradients naive_fd(const nn::GradCheckInstance& inst, double h) {
    ModelParams p = inst.params;
    nn::Gradients g = nn::Gradients::zeros_like(p);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto probe = [&](double& slot, double& out) {
            const double keep = slot;
            slot = keep + h;
            const double up = naive_loss(p, inst);
            slot = keep - h;
            const double dn = naive_loss(p, inst);
            slot = keep;
            out = (up - dn) / (2.0 * h);
        };
        for (std::size_t i = 0; i < p.layers[l].weight.size(); ++i)
            probe(p.layers[l].weight[i], g.layers[l].weight[i]);
        for (std::size_t i = 0; i < p.layers[l].bias.size(); ++i)
            probe(p.layers[l].bias[i], g.layers[l].bias[i]);
    }
    return g;
}

ModelParams zero_linear(std::size_t in, std::size_t k) {
    ModelParams p;
    p.layers.emplace_back(in, k);
    return p;
}

TEST(Forward, ZeroWeightsGiveUniform) {
    auto p = zero_linear(3, 4);
    std::vector<double> x{1.5, -2.0, 0.25};
    auto r = nn::forward(p, x);
    for (double v : r.probs) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(Forward, ConstantLogitsUniform) {
    for (double L : {-700.0, -3.0, 0.0, 42.0, 1e3}) {
        std::vector<double> logits(5, L);
        for (double v : nn::softmax(logits)) EXPECT_NEAR(v, 0.2, 1e-12);
    }
}

TEST(Forward, SoftmaxLargeMagnitudeStaysFinite) {
    std::vector<double> logits{1e3, -1e3, 999.0, 0.0};
    auto p = nn::softmax(logits);
    double sum = 0.0;
    for (double v : p) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_NEAR(p[0] / p[2], std::exp(1.0), 1e-9);
}

TEST(Forward, RandomNetNormalized) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto p = nn::init_params({2, {8}, 3}, seed);
        std::vector<double> x{double(seed) - 10.0, 0.5 * double(seed)};
        auto r = nn::forward(p, x);
        EXPECT_NEAR(std::accumulate(r.probs.begin(), r.probs.end(), 0.0), 1.0, 1e-9);
        EXPECT_EQ(r.embedding.size(), 8u);
        EXPECT_EQ(r.logits.size(), 3u);
    }
}

TEST(Forward, DimensionMismatchThrows) {
    auto p = nn::init_params({}, 1);
    std::vector<double> x{1.0, 2.0, 3.0};
    EXPECT_THROW(nn::forward(p, x), InputError);
}

TEST(Forward, DefaultArchitectureShape) {
    auto p = nn::init_params({}, 5);
    ASSERT_EQ(p.layers.size(), 3u);
    EXPECT_EQ(p.input_dim(), 2u);
    EXPECT_EQ(p.embedding_dim(), 64u);
    EXPECT_EQ(p.num_classes(), 2u);
    EXPECT_EQ(p.parameter_count(), 2u * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);
}

TEST(Backward, TargetEqualsOutputGivesZeroLogitGradient) {
    auto p = nn::init_params({2, {}, 3}, 9);
    std::vector<double> x{0.3, -0.7};
    auto target = nn::forward(p, x).probs;
    std::vector<Example> batch{{x, target, 1.0}};
    auto g = nn::backward(p, batch);
    // single layer: dL/db is the logit gradient
    for (double v : g.layers.back().bias) EXPECT_NEAR(v, 0.0, 1e-15);
    for (double v : g.layers.back().weight) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Backward, LogitGradientIsPMinusT) {
    auto p = nn::init_params({2, {}, 3}, 4);
    std::vector<double> x{1.0, 2.0};
    auto probs = nn::forward(p, x).probs;
    std::vector<double> t{0.0, 1.0, 0.0};
    std::vector<Example> batch{{x, t, 1.0}};
    auto g = nn::backward(p, batch);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(g.layers[0].bias[c], probs[c] - t[c], 1e-14);
}

TEST(Backward, EmptyBatchThrows) {
    auto p = nn::init_params({}, 1);
    EXPECT_THROW(nn::backward(p, {}), InputError);
}

TEST(Backward, MatchesIndependentFiniteDifferences) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto inst = nn::random_instance(seed);
        auto batch = inst.batch();
        auto analytic = nn::backward(inst.params, batch);
        auto numeric = naive_fd(inst, 1e-6);
        auto r = nn::compare_gradients(analytic, numeric);
        EXPECT_LT(r.rel_error, 1e-6) << "instance " << seed;
        EXPECT_LT(r.max_abs_error, 1e-8) << "instance " << seed;
        worst = std::max(worst, r.rel_error);
        EXPECT_NEAR(analytic.loss, naive_loss(inst.params, inst), 1e-12);
    }
    RecordProperty("worst_rel_error", std::to_string(worst));
}

TEST(Backward, LibraryFiniteDifferencesAgreeWithOracle) {
    auto inst = nn::random_instance(99);
    auto batch = inst.batch();
    auto lib = nn::finite_difference_gradients(inst.params, batch, 1e-6);
    auto ref = naive_fd(inst, 1e-6);
    EXPECT_LT(nn::compare_gradients(lib, ref).rel_error, 1e-8);
}

TEST(Backward, DoublingWeightsDoublesGradients) {
    auto inst = nn::random_instance(3);
    auto g1 = nn::backward(inst.params, inst.batch());
    auto doubled = inst;
    for (auto& w : doubled.weights) w *= 2.0;
    auto g2 = nn::backward(doubled.params, doubled.batch());
    for (std::size_t l = 0; l < g1.layers.size(); ++l) {
        for (std::size_t i = 0; i < g1.layers[l].weight.size(); ++i)
            EXPECT_EQ(g2.layers[l].weight[i], 2.0 * g1.layers[l].weight[i]);
        for (std::size_t i = 0; i < g1.layers[l].bias.size(); ++i)
            EXPECT_EQ(g2.layers[l].bias[i], 2.0 * g1.layers[l].bias[i]);
    }
}

TEST(Sgd, ScalarArithmetic) {
    auto p = zero_linear(1, 1);
    p.layers[0].weight[0] = 1.0;
    auto g = nn::Gradients::zeros_like(p);
    g.layers[0].weight[0] = 2.0;
    auto next = nn::sgd_step(p, g, 0.1);
    EXPECT_NEAR(next.layers[0].weight[0], 0.8, 1e-15);
}

TEST(Sgd, ZeroLrOrZeroGradIsIdentity) {
    auto p = nn::init_params({}, 2);
    auto g = nn::Gradients::zeros_like(p);
    EXPECT_EQ(nn::sgd_step(p, g, 0.5), p);
    for (auto& l : g.layers) std::fill(l.weight.begin(), l.weight.end(), 1.0);
    EXPECT_EQ(nn::sgd_step(p, g, 0.0), p);
}

TEST(Sgd, ShapeMismatchThrows) {
    auto p = nn::init_params({}, 2);
    auto g = nn::Gradients::zeros_like(nn::init_params({2, {8}, 2}, 2));
    EXPECT_ANY_THROW(nn::sgd_step(p, g, 0.1));
}

TEST(Sgd, OptimizerWithoutMomentumMatchesStep) {
    auto inst = nn::random_instance(12);
    auto g = nn::backward(inst.params, inst.batch());
    ModelParams a = inst.params;
    nn::SgdOptimizer opt(0.05);
    opt.step(a, g);
    EXPECT_EQ(a, nn::sgd_step(inst.params, g, 0.05));
}

TEST(Sgd, TrainingIsDeterministic) {
    auto run = [] {
        auto inst = nn::random_instance(21);
        ModelParams p = inst.params;
        for (int i = 0; i < 50; ++i) p = nn::sgd_step(p, nn::backward(p, inst.batch()), 0.1);
        return p;
    };
    EXPECT_EQ(run(), run());
}

TEST(Sgd, LossDecreasesOnFixedBatch) {
    auto inst = nn::random_instance(8);
    ModelParams p = inst.params;
    const double before = nn::batch_loss(p, inst.batch());
    for (int i = 0; i < 200; ++i) p = nn::sgd_step(p, nn::backward(p, inst.batch()), 0.05);
    EXPECT_LT(nn::batch_loss(p, inst.batch()), before);
    EXPECT_TRUE(p.all_finite());
}

TEST(Forward, CounterTracksTracedPasses) {
    auto p = nn::init_params({}, 1);
    nn::Trace t;
    std::vector<double> x{0.0, 0.0};
    const auto before = nn::forward_pass_count();
    for (int i = 0; i < 7; ++i) nn::forward_trace(p, x, t);
    EXPECT_EQ(nn::forward_pass_count() - before, 7u);
}

}  // namespace
