#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace iterfilter::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);

/// Reverse-mode autodiff tensor over 64-bit floats.
///
/// A Tensor is a shared handle to a node in the recorded computation graph.
/// Ops on tensors that require gradients record a backward closure; calling
/// backward() on a scalar result accumulates gradients into every reachable
/// leaf that requires them. Storage is row-major.
class Tensor {
public:
    Tensor() = default;

    static Tensor constant(Shape shape, std::vector<double> data);
    static Tensor parameter(Shape shape, std::vector<double> data);
    static Tensor zeros(Shape shape, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t dim(std::size_t axis) const { return shape().at(axis); }
    std::size_t size() const;
    bool requires_grad() const;

    std::span<const double> data() const;
    std::span<double> data();
    /// Empty until a backward pass reaches this tensor.
    std::span<const double> grad() const;
    bool has_grad() const;
    void zero_grad();

    /// Value of a one-element tensor.
    double item() const;
    /// Constant copy cut from the graph.
    Tensor detach() const;

    struct Node;

private:
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
    std::shared_ptr<Node> node_;

    friend Tensor make_result(Shape, std::vector<double>, std::vector<Tensor>,
                              std::function<void(Node&)>);
    friend void backward(const Tensor& loss);
    friend Node& node_of(const Tensor& t);
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

    static bool active();

private:
    bool previous_;
};

// Elementwise ops require identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor relu(const Tensor& x);

/// x[n x k] * w[m x k]^T -> [n x m]
Tensor matmul_t(const Tensor& x, const Tensor& w);
/// x[n x m] + b[m] broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& b);
/// x * w^T + b; `b` may be undefined for no bias.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

/// Columns [begin, end) of a 2-D tensor.
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
/// [a | b] along columns; row counts must match.
Tensor concat_cols(const Tensor& a, const Tensor& b);
/// out[e] = x[index[e]]
Tensor gather_rows(const Tensor& x, std::span<const std::uint32_t> index);
/// out[index[e]] += x[e], with `rows` output rows.
Tensor scatter_sum_rows(const Tensor& x, std::span<const std::uint32_t> index, std::size_t rows);

/// Fused edge aggregation used by EdgeConv:
///   out[i] = sum over edges e with src[e] == i of act(center[src[e]] + neighbor[dst[e]] + bias)
/// where act is ReLU when `apply_relu` is set and identity otherwise.
/// Memory stays O(n F) instead of O(|E| F).
Tensor edge_message_sum(const Tensor& center, const Tensor& neighbor, const Tensor& bias,
                        std::span<const std::uint32_t> src, std::span<const std::uint32_t> dst, bool apply_relu);

/// Sum of all elements, shape {1}.
Tensor sum(const Tensor& x);
/// Per-row sum of a 2-D tensor, shape {n}.
Tensor row_sum(const Tensor& x);

/// Accumulates d(loss)/d(leaf) for every reachable leaf with requires_grad.
/// Throws InvalidInput unless `loss` has exactly one element, and
/// NumericError if any gradient is non-finite.
void backward(const Tensor& loss);

/// Throws NumericError naming `what` if any value is NaN or Inf.
void check_finite(std::span<const double> values, const char* what);

} // namespace iterfilter::nn
