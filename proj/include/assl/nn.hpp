#pragma once

// Small fully connected classifier: ReLU hidden layers, softmax output,
// weighted cross-entropy loss with exact backpropagation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace assl::nn {

struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;  // row-major, out x in
    std::vector<double> bias;    // out

    Layer() = default;
    Layer(std::size_t in_dim, std::size_t out_dim)
        : in(in_dim), out(out_dim), weight(in_dim * out_dim, 0.0), bias(out_dim, 0.0) {}

    std::span<const double> row(std::size_t r) const { return {weight.data() + r * in, in}; }
    std::span<double> row(std::size_t r) { return {weight.data() + r * in, in}; }

    bool operator==(const Layer&) const = default;
};

/// Network parameters. Every layer except the last is followed by ReLU; the
/// output of the last hidden layer is the embedding.
struct ModelParams {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.front().in; }
    std::size_t num_classes() const { return layers.back().out; }
    std::size_t embedding_dim() const {
        return layers.size() > 1 ? layers[layers.size() - 2].out : input_dim();
    }
    std::size_t parameter_count() const;
    bool all_finite() const;

    /// Throws InputError if layer dimensions do not chain.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

/// Same shapes as the parameters they differentiate.
struct Gradients {
    std::vector<Layer> layers;
    double loss = 0.0;

    static Gradients zeros_like(const ModelParams& params);
    void scale(double factor);
};

struct Architecture {
    std::size_t input_dim = 2;
    std::vector<std::size_t> hidden{64, 64};
    std::size_t num_classes = 2;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
ModelParams init_params(const Architecture& arch, std::uint64_t seed);

struct ForwardResult {
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> embedding;
};

ForwardResult forward(const ModelParams& params, std::span<const double> x);

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);
void softmax_into(std::span<const double> logits, std::span<double> out);

/// Activations of every layer from one forward pass, kept for backprop.
/// Reusable across calls to avoid reallocating in training loops.
struct Trace {
    std::vector<std::vector<double>> activations;  // [0] = input, back() = logits
    std::vector<double> probs;
    std::vector<double> delta;
    std::vector<double> delta_prev;

    std::span<const double> embedding() const { return activations[activations.size() - 2]; }
    std::span<const double> logits() const { return activations.back(); }
};

void forward_trace(const ModelParams& params, std::span<const double> x, Trace& trace);

struct Example {
    std::span<const double> x;
    std::span<const double> target;  // distribution over classes
    double weight = 1.0;
};

/// Cross-entropy -sum_c t_c log p_c of a traced forward pass.
double cross_entropy(const Trace& trace, std::span<const double> target);

/// Adds scale * d(CE)/d(params) for the traced example into `grads` and
/// returns the example's cross-entropy. `trace` must come from forward_trace
/// on the same params.
double accumulate_gradients(const ModelParams& params, Trace& trace,
                            std::span<const double> target, double scale, Gradients& grads);

/// Gradients of (1/N) sum_b w_b CE(t_b, p(x_b)). Throws InputError on an
/// empty batch or shape mismatch.
Gradients backward(const ModelParams& params, std::span<const Example> batch);

/// The loss differentiated by backward(), computed by forward passes only.
double batch_loss(const ModelParams& params, std::span<const Example> batch);

/// params - lr * grads, elementwise.
ModelParams sgd_step(const ModelParams& params, const Gradients& grads, double lr);

/// Plain SGD with optional heavy-ball momentum. With momentum 0 a step is
/// bit-identical to sgd_step.
class SgdOptimizer {
public:
    SgdOptimizer(double lr, double momentum = 0.0);

    void step(ModelParams& params, const Gradients& grads);

private:
    double lr_;
    double momentum_;
    std::vector<Layer> velocity_;
};

/// Per-thread count of forward passes, for asserting that an acquisition
/// strategy performs no inference.
std::uint64_t forward_pass_count() noexcept;

}  // namespace assl::nn
