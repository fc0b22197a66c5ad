#include "assl/gradcheck.hpp"

#include "assl/rng.hpp"

#include <algorithm>
#include <cmath>

namespace assl::nn {

Gradients finite_difference_gradients(const ModelParams& params, std::span<const Example> batch,
                                      double step) {
    ModelParams probe = params;
    Gradients numeric = Gradients::zeros_like(params);
    auto central = [&](double& slot) {
        const double saved = slot;
        slot = saved + step;
        const double up = batch_loss(probe, batch);
        slot = saved - step;
        const double down = batch_loss(probe, batch);
        slot = saved;
        return (up - down) / (2.0 * step);
    };
    for (std::size_t l = 0; l < probe.layers.size(); ++l) {
        auto& layer = probe.layers[l];
        for (std::size_t i = 0; i < layer.weight.size(); ++i)
            numeric.layers[l].weight[i] = central(layer.weight[i]);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            numeric.layers[l].bias[i] = central(layer.bias[i]);
    }
    numeric.loss = batch_loss(params, batch);
    return numeric;
}

GradCheckResult compare_gradients(const Gradients& analytic, const Gradients& numeric,
                                  double floor) {
    GradCheckResult r;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    auto visit = [&](double a, double n) {
        const double abs_err = std::abs(a - n);
        diff2 += abs_err * abs_err;
        a2 += a * a;
        n2 += n * n;
        const double denom = std::max({std::abs(a), std::abs(n), floor});
        r.max_abs_error = std::max(r.max_abs_error, abs_err);
        r.max_rel_error = std::max(r.max_rel_error, abs_err / denom);
        ++r.parameters;
    };
    for (std::size_t l = 0; l < analytic.layers.size(); ++l) {
        const auto& a = analytic.layers[l];
        const auto& n = numeric.layers[l];
        for (std::size_t i = 0; i < a.weight.size(); ++i) visit(a.weight[i], n.weight[i]);
        for (std::size_t i = 0; i < a.bias.size(); ++i) visit(a.bias[i], n.bias[i]);
    }
    const double scale = std::sqrt(a2) + std::sqrt(n2);
    r.rel_error = scale > 0.0 ? std::sqrt(diff2) / scale : 0.0;
    return r;
}

std::vector<Example> GradCheckInstance::batch() const {
    std::vector<Example> out;
    for (std::size_t b = 0; b < inputs.size(); ++b) out.push_back({inputs[b], targets[b], weights[b]});
    return out;
}

GradCheckInstance random_instance(std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<std::size_t> width(2, 7);
    std::uniform_int_distribution<std::size_t> depth(0, 2);
    Architecture arch;
    arch.input_dim = width(rng);
    arch.num_classes = width(rng);
    arch.hidden.clear();
    for (std::size_t h = depth(rng) + 1; h-- > 0;) arch.hidden.push_back(width(rng) + 2);

    GradCheckInstance inst;
    inst.params = init_params(arch, rng());
    std::normal_distribution<double> normal(0.0, 0.3);
    for (auto& layer : inst.params.layers) {
        for (double& b : layer.bias) b = normal(rng);
    }

    std::uniform_int_distribution<std::size_t> batch_size(1, 6);
    std::normal_distribution<double> input(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    const std::size_t n = batch_size(rng);
    for (std::size_t b = 0; b < n; ++b) {
        std::vector<double> x(arch.input_dim);
        for (double& v : x) v = input(rng);
        std::vector<double> t(arch.num_classes);
        double sum = 0.0;
        for (double& v : t) sum += (v = unit(rng));
        for (double& v : t) v /= sum;
        inst.inputs.push_back(std::move(x));
        inst.targets.push_back(std::move(t));
        inst.weights.push_back(unit(rng) * 2.0);
    }
    return inst;
}

}  // namespace assl::nn
