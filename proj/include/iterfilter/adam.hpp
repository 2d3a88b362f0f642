#pragma once

#include "iterfilter/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace iterfilter::nn {

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

/// Bias-corrected Adam update of each tensor from its accumulated gradient.
/// Tensors without a gradient are treated as having a zero gradient.
void adam_step(std::span<Tensor> params, AdamState& state, double learning_rate);

} // namespace iterfilter::nn
