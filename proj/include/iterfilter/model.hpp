#pragma once

#include "iterfilter/graph.hpp"
#include "iterfilter/layers.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace iterfilter::filter {

inline constexpr std::size_t max_iterations = 12;

struct ModelConfig {
    std::size_t iterations = 4; // T, the number of IterationModules
    std::size_t k = graph::default_k;
    std::vector<std::size_t> encoder_dims{3, 32, 64, 128, 256};
    std::vector<std::size_t> decoder_dims{256, 128, 64, 32, 3};
    /// Extra factor on the Kaiming bound of each decoder's output layer.
    /// Small values start every module close to the identity map.
    double output_init_scale = 0.01;

    /// Throws InvalidInput on an unusable configuration.
    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

/// One internal filtering iteration: EdgeConv encoder + 4-layer FC decoder.
struct IterationModuleParams {
    std::vector<nn::EdgeConvParams> encoder;
    nn::MLPParams decoder;
};

/// T IterationModules with independent parameters.
struct IterativePFNParams {
    ModelConfig config;
    std::vector<IterationModuleParams> modules;

    /// Kaiming-uniform initialization from `seed`.
    ///
    /// The first theta layer of each EdgeConv is additionally scaled by 1/k:
    /// its messages are summed over k neighbors, and without the factor the
    /// feature magnitude grows by roughly k per layer. The decoder output
    /// layer is scaled by config.output_init_scale.
    static IterativePFNParams init(const ModelConfig& config, std::uint64_t seed);
    /// All weights and biases zero; the model then predicts zero displacement.
    static IterativePFNParams zeros(const ModelConfig& config);

    /// Copies hold tensor handles, so they share storage; clone() does not.
    IterativePFNParams clone() const;

    std::size_t iterations() const { return modules.size(); }

    /// Stable names such as "module0.encoder1.theta0.weight".
    std::vector<std::pair<std::string, nn::Tensor>> named_parameters() const;
    std::vector<nn::Tensor> parameters() const;
    std::size_t parameter_count() const;
};

/// Builds the spatial kNN graph from `positions` [n x 3], runs the encoder
/// and decoder, and returns per-point displacements [n x 3]. The graph is a
/// function of the current values only; gradients flow through the features.
nn::Tensor iteration_module_forward(const nn::Tensor& positions, const IterationModuleParams& params, std::size_t k);

/// Intermediate values of a forward pass through all modules.
struct ForwardTrace {
    std::vector<nn::Tensor> inputs;        // x^(tau-1), tau = 1..T
    std::vector<nn::Tensor> displacements; // d^(tau)
    nn::Tensor output;                     // x^(T)
};

/// x^(tau) = x^(tau-1) + d^(tau), positions carried end to end with gradients.
ForwardTrace run_modules(const nn::Tensor& initial_positions, const IterativePFNParams& params);

/// Uniform patch scale: coordinates are divided by the patch radius on the
/// way in and displacements multiplied by it on the way out.
double patch_scale(const graph::Patch& patch);

/// Total displacement of every patch point in the parent frame, i.e. the
/// patch radius times the summed normalized module outputs.
std::vector<geo::Vec3> patch_displacements(const graph::Patch& patch, const IterativePFNParams& params);

/// Filters every point of a patch. Returns positions in the parent frame:
/// parent point + radius * (total normalized displacement).
std::vector<geo::Vec3> filter_patch(const graph::Patch& patch, const IterativePFNParams& params);

/// [n x 3] tensor from points, optionally scaled.
nn::Tensor positions_tensor(std::span<const geo::Vec3> points, double scale = 1.0);

} // namespace iterfilter::filter
