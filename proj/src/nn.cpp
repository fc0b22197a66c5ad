#include "assl/nn.hpp"

#include "assl/error.hpp"
#include "assl/kernels.hpp"
#include "assl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace assl::nn {
namespace {

thread_local std::uint64_t t_forward_passes = 0;

void check_shapes(const std::vector<Layer>& a, const std::vector<Layer>& b) {
    if (a.size() != b.size()) throw InputError("layer count mismatch");
    for (std::size_t l = 0; l < a.size(); ++l) {
        if (a[l].in != b[l].in || a[l].out != b[l].out) {
            throw InputError("layer " + std::to_string(l) + " shape mismatch");
        }
    }
}

}  // namespace

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
    return n;
}

bool ModelParams::all_finite() const {
    for (const auto& layer : layers) {
        for (double w : layer.weight)
            if (!std::isfinite(w)) return false;
        for (double b : layer.bias)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

void ModelParams::validate() const {
    if (layers.empty()) throw InputError("model has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& layer = layers[l];
        if (layer.in == 0 || layer.out == 0) throw InputError("empty layer");
        if (layer.weight.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
            throw InputError("layer " + std::to_string(l) + " storage does not match its shape");
        }
        if (l + 1 < layers.size() && layer.out != layers[l + 1].in) {
            throw InputError("layer " + std::to_string(l) + " output does not feed layer " +
                             std::to_string(l + 1));
        }
    }
}

Gradients Gradients::zeros_like(const ModelParams& params) {
    Gradients g;
    g.layers.reserve(params.layers.size());
    for (const auto& layer : params.layers) g.layers.emplace_back(layer.in, layer.out);
    return g;
}

void Gradients::scale(double factor) {
    for (auto& layer : layers) {
        for (double& w : layer.weight) w *= factor;
        for (double& b : layer.bias) b *= factor;
    }
    loss *= factor;
}

ModelParams init_params(const Architecture& arch, std::uint64_t seed) {
    if (arch.input_dim == 0 || arch.num_classes == 0) throw ConfigError("empty architecture");
    Rng rng = make_rng(seed);
    ModelParams params;
    std::size_t in = arch.input_dim;
    auto add = [&](std::size_t out) {
        Layer layer(in, out);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& w : layer.weight) w = dist(rng);
        params.layers.push_back(std::move(layer));
        in = out;
    };
    for (std::size_t h : arch.hidden) {
        if (h == 0) throw ConfigError("hidden layer of width 0");
        add(h);
    }
    add(arch.num_classes);
    return params;
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& p : out) p /= sum;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    softmax_into(logits, out);
    return out;
}

void forward_trace(const ModelParams& params, std::span<const double> x, Trace& trace) {
    if (params.layers.empty()) throw InputError("model has no layers");
    if (x.size() != params.input_dim()) {
        throw InputError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(params.input_dim()));
    }
    ++t_forward_passes;
    const auto& k = kernels::active();
    const std::size_t n_layers = params.layers.size();
    trace.activations.resize(n_layers + 1);
    trace.activations[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Layer& layer = params.layers[l];
        auto& out = trace.activations[l + 1];
        out.resize(layer.out);
        k.matvec_bias(layer.weight.data(), layer.out, layer.in, trace.activations[l].data(),
                      layer.bias.data(), out.data());
        if (l + 1 < n_layers) {
            for (double& v : out) v = v > 0.0 ? v : 0.0;
        }
    }
    trace.probs.resize(params.num_classes());
    softmax_into(trace.activations.back(), trace.probs);
}

ForwardResult forward(const ModelParams& params, std::span<const double> x) {
    Trace trace;
    forward_trace(params, x, trace);
    ForwardResult r;
    r.logits = trace.activations.back();
    r.probs = std::move(trace.probs);
    r.embedding = trace.activations[trace.activations.size() - 2];
    return r;
}

double cross_entropy(const Trace& trace, std::span<const double> target) {
    const auto logits = trace.logits();
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    const double lse = m + std::log(sum);
    double ce = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        if (target[c] != 0.0) ce -= target[c] * (logits[c] - lse);
    }
    return ce;
}

double accumulate_gradients(const ModelParams& params, Trace& trace,
                            std::span<const double> target, double scale, Gradients& grads) {
    const std::size_t k = params.num_classes();
    if (target.size() != k) throw InputError("target dimension does not match class count");
    const auto& kern = kernels::active();

    double target_mass = 0.0;
    for (double t : target) target_mass += t;

    // dCE/dz = (sum t) * p - t
    trace.delta.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        trace.delta[c] = scale * (target_mass * trace.probs[c] - target[c]);
    }

    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const Layer& layer = params.layers[l];
        Layer& g = grads.layers[l];
        const auto& input = trace.activations[l];
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double d = trace.delta[o];
            if (d == 0.0) continue;
            g.bias[o] += d;
            kern.axpy(d, input.data(), g.weight.data() + o * layer.in, layer.in);
        }
        if (l == 0) break;
        trace.delta_prev.assign(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double d = trace.delta[o];
            if (d == 0.0) continue;
            kern.axpy(d, layer.weight.data() + o * layer.in, trace.delta_prev.data(), layer.in);
        }
        // ReLU: the activation is positive exactly where the pre-activation was.
        for (std::size_t i = 0; i < layer.in; ++i) {
            if (!(input[i] > 0.0)) trace.delta_prev[i] = 0.0;
        }
        std::swap(trace.delta, trace.delta_prev);
    }
    return cross_entropy(trace, target);
}

Gradients backward(const ModelParams& params, std::span<const Example> batch) {
    if (batch.empty()) throw InputError("backward called with an empty batch");
    Gradients grads = Gradients::zeros_like(params);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    Trace trace;
    for (const Example& ex : batch) {
        forward_trace(params, ex.x, trace);
        const double ce = accumulate_gradients(params, trace, ex.target, ex.weight * inv_n, grads);
        grads.loss += ex.weight * inv_n * ce;
    }
    return grads;
}

double batch_loss(const ModelParams& params, std::span<const Example> batch) {
    if (batch.empty()) throw InputError("loss of an empty batch");
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    Trace trace;
    double loss = 0.0;
    for (const Example& ex : batch) {
        forward_trace(params, ex.x, trace);
        loss += ex.weight * inv_n * cross_entropy(trace, ex.target);
    }
    return loss;
}

ModelParams sgd_step(const ModelParams& params, const Gradients& grads, double lr) {
    check_shapes(params.layers, grads.layers);
    ModelParams next = params;
    for (std::size_t l = 0; l < next.layers.size(); ++l) {
        auto& p = next.layers[l];
        const auto& g = grads.layers[l];
        for (std::size_t i = 0; i < p.weight.size(); ++i) p.weight[i] -= lr * g.weight[i];
        for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= lr * g.bias[i];
    }
    return next;
}

SgdOptimizer::SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
}

void SgdOptimizer::step(ModelParams& params, const Gradients& grads) {
    check_shapes(params.layers, grads.layers);
    if (momentum_ == 0.0) {
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            auto& p = params.layers[l];
            const auto& g = grads.layers[l];
            for (std::size_t i = 0; i < p.weight.size(); ++i) p.weight[i] -= lr_ * g.weight[i];
            for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= lr_ * g.bias[i];
        }
        return;
    }
    if (velocity_.empty()) {
        for (const auto& layer : params.layers) velocity_.emplace_back(layer.in, layer.out);
    }
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& p = params.layers[l];
        auto& v = velocity_[l];
        const auto& g = grads.layers[l];
        for (std::size_t i = 0; i < p.weight.size(); ++i) {
            v.weight[i] = momentum_ * v.weight[i] + g.weight[i];
            p.weight[i] -= lr_ * v.weight[i];
        }
        for (std::size_t i = 0; i < p.bias.size(); ++i) {
            v.bias[i] = momentum_ * v.bias[i] + g.bias[i];
            p.bias[i] -= lr_ * v.bias[i];
        }
    }
}

std::uint64_t forward_pass_count() noexcept { return t_forward_passes; }

}  // namespace assl::nn
