#pragma once

#include "iterfilter/geometry.hpp"
#include "iterfilter/graph.hpp"
#include "iterfilter/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace iterfilter::filter {

enum class LossKind { Adaptive, Fixed };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

/// Clean patch plus isotropic Gaussian noise of standard deviation sigma.
/// sigma == 0 returns the patch unchanged.
graph::Patch make_adaptive_target(const graph::Patch& clean, double sigma, std::uint64_t seed);

/// Index of the nearest target point by exhaustive scan (ties: lower index).
std::uint32_t nearest_index(const geo::Vec3& query, std::span<const geo::Vec3> targets);

/// sum_t sum_i w_i || d_i^(t) - (NN(x_i^(t-1), Y^(t)) - x_i^(t-1)) ||^2
///
/// `inputs[t]` are the positions fed to module t, `targets[t]` its target
/// patch. The nearest-neighbor choice is a constant of the current values;
/// gradients flow through both d and x.
nn::Tensor iterative_nn_loss(std::span<const nn::Tensor> displacements, std::span<const nn::Tensor> inputs,
                             std::span<const std::vector<geo::Vec3>> targets, std::span<const double> weights);

/// Adaptive-target loss; one target per iteration.
nn::Tensor loss_adaptive(std::span<const nn::Tensor> displacements, std::span<const nn::Tensor> inputs,
                         std::span<const std::vector<geo::Vec3>> targets, std::span<const double> weights);

/// Fixed-target loss; every iteration regresses toward the clean patch.
nn::Tensor loss_fixed(std::span<const nn::Tensor> displacements, std::span<const nn::Tensor> inputs,
                      std::span<const geo::Vec3> clean, std::span<const double> weights);

} // namespace iterfilter::filter
