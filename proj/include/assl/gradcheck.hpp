#pragma once

#include "assl/nn.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace assl::nn {

/// Central finite differences of batch_loss with respect to every parameter,
/// laid out like Gradients. Uses forward passes only.
Gradients finite_difference_gradients(const ModelParams& params, std::span<const Example> batch,
                                      double step = 1e-6);

struct GradCheckResult {
    double rel_error = 0.0;  // |a - n| / (|a| + |n|) over the whole parameter vector
    double max_rel_error = 0.0;  // elementwise, denominators floored
    double max_abs_error = 0.0;
    std::size_t parameters = 0;
};

/// |a - n| / max(|a|, |n|, floor), maximised over all parameters.
GradCheckResult compare_gradients(const Gradients& analytic, const Gradients& numeric,
                                  double floor = 1e-6);

struct GradCheckInstance {
    ModelParams params;
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;
    std::vector<double> weights;

    std::vector<Example> batch() const;
};

/// A random small network and batch (soft targets, positive weights).
GradCheckInstance random_instance(std::uint64_t seed);

}  // namespace assl::nn
