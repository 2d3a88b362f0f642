#pragma once

#include "iterfilter/graph.hpp"
#include "iterfilter/rng.hpp"
#include "iterfilter/tensor.hpp"

#include <string>
#include <vector>

namespace iterfilter::nn {

enum class Activation { ReLU, None };

/// y = act(x W^T + b) with W stored [out x in].
struct DenseLayer {
    Tensor weight;
    Tensor bias;
    Activation activation = Activation::ReLU;

    std::size_t in_dim() const { return weight.dim(1); }
    std::size_t out_dim() const { return weight.dim(0); }
};

struct MLPParams {
    std::vector<DenseLayer> layers;

    std::size_t in_dim() const { return layers.front().in_dim(); }
    std::size_t out_dim() const { return layers.back().out_dim(); }
    /// Throws ShapeError unless consecutive layer dimensions chain.
    void validate() const;
};

/// h'_i = phi(h_i) + sum over edges (i, j) of theta(h_i || h_j - h_i)
struct EdgeConvParams {
    MLPParams phi;   // F -> F'
    MLPParams theta; // 2F -> F'
};

/// Kaiming-uniform weights (bound sqrt(6 / fan_in) * gain_scale), zero biases.
DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng, double gain_scale = 1.0);
DenseLayer make_dense_zero(std::size_t in, std::size_t out, Activation act);

/// One dense layer per consecutive pair in `dims`; ReLU on all but the last
/// layer when `last_activation` is None.
MLPParams make_mlp(const std::vector<std::size_t>& dims, Activation last_activation, Rng& rng);
MLPParams make_mlp_zero(const std::vector<std::size_t>& dims, Activation last_activation);

Tensor dense_forward(const Tensor& x, const DenseLayer& layer);
Tensor mlp_forward(const Tensor& x, const MLPParams& mlp);

/// EdgeConv with SUM aggregation.
///
/// The first theta layer acts on [h_i | h_j - h_i]; splitting its weight as
/// [A | B] gives A h_i + B (h_j - h_i) = (A - B) h_i + B h_j, so the matrix
/// products run once per vertex and only the gather, activation and any
/// further theta layers run per edge. Numerically equivalent to
/// edgeconv_forward_concat up to float reassociation.
Tensor edgeconv_forward(const Tensor& h, const graph::DirectedGraph& graph, const EdgeConvParams& params);

/// Literal per-edge evaluation of the same update (concatenate, then MLP).
Tensor edgeconv_forward_concat(const Tensor& h, const graph::DirectedGraph& graph, const EdgeConvParams& params);

/// Four-layer FC decoder producing per-vertex 3D displacements.
/// Throws ShapeError unless there are exactly 4 layers ending in 3 outputs
/// with no activation on the last one.
Tensor decoder_forward(const Tensor& h, const MLPParams& params);

} // namespace iterfilter::nn
