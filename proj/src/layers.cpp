#include "iterfilter/layers.hpp"

#include "iterfilter/error.hpp"

#include <cmath>

namespace iterfilter::nn {

void MLPParams::validate() const {
    if (layers.empty()) throw ShapeError("MLP has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        if (L.weight.shape().size() != 2 || L.bias.size() != L.out_dim())
            throw ShapeError("MLP layer " + std::to_string(l) + " has inconsistent weight/bias shapes");
        if (l > 0 && layers[l - 1].out_dim() != L.in_dim())
            throw ShapeError("MLP layer " + std::to_string(l) + " expects " + std::to_string(L.in_dim()) +
                             " inputs but previous layer yields " + std::to_string(layers[l - 1].out_dim()));
    }
}

DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng, double gain_scale) {
    const double bound = gain_scale * std::sqrt(6.0 / static_cast<double>(in));
    std::vector<double> w(out * in);
    for (auto& v : w) v = rng.uniform(-bound, bound);
    return {Tensor::parameter({out, in}, std::move(w)), Tensor::parameter({out}, std::vector<double>(out, 0.0)), act};
}

DenseLayer make_dense_zero(std::size_t in, std::size_t out, Activation act) {
    return {Tensor::zeros({out, in}, true), Tensor::zeros({out}, true), act};
}

namespace {

template <typename MakeLayer>
MLPParams build_mlp(const std::vector<std::size_t>& dims, Activation last_activation, MakeLayer make) {
    if (dims.size() < 2) throw ShapeError("an MLP needs at least input and output dimensions");
    MLPParams mlp;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const bool last = l + 2 == dims.size();
        mlp.layers.push_back(make(dims[l], dims[l + 1], last ? last_activation : Activation::ReLU));
    }
    return mlp;
}

} // namespace

MLPParams make_mlp(const std::vector<std::size_t>& dims, Activation last_activation, Rng& rng) {
    return build_mlp(dims, last_activation,
                     [&](std::size_t i, std::size_t o, Activation a) { return make_dense(i, o, a, rng); });
}

MLPParams make_mlp_zero(const std::vector<std::size_t>& dims, Activation last_activation) {
    return build_mlp(dims, last_activation,
                     [](std::size_t i, std::size_t o, Activation a) { return make_dense_zero(i, o, a); });
}

Tensor dense_forward(const Tensor& x, const DenseLayer& layer) {
    Tensor y = linear(x, layer.weight, layer.bias);
    return layer.activation == Activation::ReLU ? relu(y) : y;
}

Tensor mlp_forward(const Tensor& x, const MLPParams& mlp) {
    Tensor y = x;
    for (const auto& layer : mlp.layers) y = dense_forward(y, layer);
    return y;
}

namespace {

void check_edgeconv(const Tensor& h, const graph::DirectedGraph& graph, const EdgeConvParams& params) {
    if (h.shape().size() != 2) throw ShapeError("edgeconv: features must be 2-D");
    if (h.dim(0) != graph.vertex_count)
        throw ShapeError("edgeconv: " + std::to_string(h.dim(0)) + " feature rows for a graph of " +
                         std::to_string(graph.vertex_count) + " vertices");
    params.phi.validate();
    params.theta.validate();
    const std::size_t f = h.dim(1);
    if (params.phi.in_dim() != f || params.theta.in_dim() != 2 * f)
        throw ShapeError("edgeconv: parameter input dims do not match feature dim " + std::to_string(f));
    if (params.phi.out_dim() != params.theta.out_dim()) throw ShapeError("edgeconv: phi and theta output dims differ");
}

} // namespace

Tensor edgeconv_forward(const Tensor& h, const graph::DirectedGraph& graph, const EdgeConvParams& params) {
    check_edgeconv(h, graph, params);
    const std::size_t f = h.dim(1);
    const std::size_t n = h.dim(0);
    Tensor self_term = mlp_forward(h, params.phi);
    if (graph.edges.empty()) return self_term;

    const auto src = graph.sources();
    const auto dst = graph.targets();
    const DenseLayer& first = params.theta.layers.front();
    Tensor a = slice_cols(first.weight, 0, f);
    Tensor b = slice_cols(first.weight, f, 2 * f);
    Tensor bh = matmul_t(h, b);
    Tensor center = sub(matmul_t(h, a), bh); // (A - B) h_i
    const bool first_relu = first.activation == Activation::ReLU;
    if (params.theta.layers.size() == 1)
        return add(self_term, edge_message_sum(center, bh, first.bias, src, dst, first_relu));

    Tensor pre = add_bias(add(gather_rows(center, src), gather_rows(bh, dst)), first.bias);
    Tensor msg = first_relu ? relu(pre) : pre;
    for (std::size_t l = 1; l < params.theta.layers.size(); ++l) msg = dense_forward(msg, params.theta.layers[l]);
    return add(self_term, scatter_sum_rows(msg, src, n));
}

Tensor edgeconv_forward_concat(const Tensor& h, const graph::DirectedGraph& graph, const EdgeConvParams& params) {
    check_edgeconv(h, graph, params);
    Tensor self_term = mlp_forward(h, params.phi);
    if (graph.edges.empty()) return self_term;
    const auto src = graph.sources();
    const auto dst = graph.targets();
    Tensor hi = gather_rows(h, src);
    Tensor hj = gather_rows(h, dst);
    Tensor msg = mlp_forward(concat_cols(hi, sub(hj, hi)), params.theta);
    return add(self_term, scatter_sum_rows(msg, src, h.dim(0)));
}

Tensor decoder_forward(const Tensor& h, const MLPParams& params) {
    params.validate();
    if (params.layers.size() != 4) throw ShapeError("decoder must have exactly 4 layers");
    if (params.out_dim() != 3) throw ShapeError("decoder must output 3 values per vertex");
    if (params.layers.back().activation != Activation::None)
        throw ShapeError("decoder output layer must not have an activation");
    if (h.shape().size() != 2 || h.dim(1) != params.in_dim())
        throw ShapeError("decoder input width does not match its first layer");
    return mlp_forward(h, params);
}

} // namespace iterfilter::nn
