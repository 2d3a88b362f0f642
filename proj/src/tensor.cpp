#include "iterfilter/tensor.hpp"

#include "iterfilter/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace iterfilter::nn {

struct Tensor::Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    std::vector<double>& grad_buffer() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
        return grad;
    }
};

using Node = Tensor::Node;

namespace {

thread_local bool g_no_grad = false;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
    return out + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void require_2d(const Tensor& t, const char* op) {
    if (t.shape().size() != 2) throw ShapeError(std::string(op) + ": expected a 2-D tensor, got " + shape_str(t.shape()));
}

} // namespace

Node& node_of(const Tensor& t) {
    if (!t.node_) throw InvalidInput("use of an undefined tensor");
    return *t.node_;
}

Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward_fn) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(data);
    bool needs_grad = false;
    if (!g_no_grad)
        for (const auto& p : parents) needs_grad = needs_grad || node_of(p).requires_grad;
    if (needs_grad) {
        node->requires_grad = true;
        for (const auto& p : parents) node->parents.push_back(p.node_);
        node->backward_fn = std::move(backward_fn);
    }
    return Tensor(std::move(node));
}

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

namespace {

Tensor leaf(Shape shape, std::vector<double> data, bool requires_grad) {
    if (numel(shape) != data.size())
        throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_str(shape));
    Tensor t = make_result(std::move(shape), std::move(data), {}, {});
    node_of(t).requires_grad = requires_grad;
    return t;
}

} // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> data) { return leaf(std::move(shape), std::move(data), false); }
Tensor Tensor::parameter(Shape shape, std::vector<double> data) { return leaf(std::move(shape), std::move(data), true); }
Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    const auto n = numel(shape);
    return leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

const Shape& Tensor::shape() const { return node_of(*this).shape; }
std::size_t Tensor::size() const { return node_of(*this).value.size(); }
bool Tensor::requires_grad() const { return node_of(*this).requires_grad; }
std::span<const double> Tensor::data() const { return node_of(*this).value; }
std::span<double> Tensor::data() { return node_of(*this).value; }
std::span<const double> Tensor::grad() const { return node_of(*this).grad; }
bool Tensor::has_grad() const { return !node_of(*this).grad.empty(); }
void Tensor::zero_grad() { node_of(*this).grad.clear(); }

double Tensor::item() const {
    if (size() != 1) throw InvalidInput("item() on a tensor with " + std::to_string(size()) + " elements");
    return data()[0];
}

Tensor Tensor::detach() const { return constant(shape(), node_of(*this).value); }

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }
bool NoGradGuard::active() { return g_no_grad; }

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.size());
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        for (auto& p : self.parents) {
            if (!p->requires_grad) continue;
            auto& g = p->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.size());
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        const double sign[2] = {1.0, -1.0};
        for (std::size_t k = 0; k < 2; ++k) {
            auto& p = self.parents[k];
            if (!p->requires_grad) continue;
            auto& g = p->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign[k] * self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.size());
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        auto& pa = self.parents[0];
        auto& pb = self.parents[1];
        if (pa->requires_grad) {
            auto& g = pa->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->value[i];
        }
        if (pb->requires_grad) {
            auto& g = pb->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->value[i];
        }
    });
}

Tensor scale(const Tensor& x, double factor) {
    std::vector<double> out(x.data().begin(), x.data().end());
    for (auto& v : out) v *= factor;
    return make_result(x.shape(), std::move(out), {x}, [factor](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
    });
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.data().begin(), x.data().end());
    for (auto& v : out) v = v > 0.0 ? v : 0.0;
    return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
        auto& p = *self.parents[0];
        auto& g = p.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (p.value[i] > 0.0) g[i] += self.grad[i];
    });
}

Tensor matmul_t(const Tensor& x, const Tensor& w) {
    require_2d(x, "matmul_t");
    require_2d(w, "matmul_t");
    const std::size_t n = x.dim(0), k = x.dim(1), m = w.dim(0);
    if (w.dim(1) != k)
        throw ShapeError("matmul_t: " + shape_str(x.shape()) + " times transpose of " + shape_str(w.shape()));
    std::vector<double> out(n * m);
    if (n > 0 && m > 0) {
        MutMap Y(out.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
        if (k == 0) Y.setZero();
        else Y.noalias() = ConstMap(x.data().data(), n, k) * ConstMap(w.data().data(), m, k).transpose();
    }
    return make_result({n, m}, std::move(out), {x, w}, [n, k, m](Node& self) {
        if (n == 0 || m == 0 || k == 0) return;
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        ConstMap dY(self.grad.data(), n, m);
        if (px.requires_grad) {
            MutMap dX(px.grad_buffer().data(), n, k);
            dX.noalias() += dY * ConstMap(pw.value.data(), m, k);
        }
        if (pw.requires_grad) {
            MutMap dW(pw.grad_buffer().data(), m, k);
            dW.noalias() += dY.transpose() * ConstMap(px.value.data(), n, k);
        }
    });
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
    require_2d(x, "add_bias");
    const std::size_t n = x.dim(0), m = x.dim(1);
    if (b.size() != m) throw ShapeError("add_bias: bias length " + std::to_string(b.size()) + " vs " + std::to_string(m) + " columns");
    std::vector<double> out(x.data().begin(), x.data().end());
    const auto bias = b.data();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) out[r * m + c] += bias[c];
    return make_result(x.shape(), std::move(out), {x, b}, [n, m](Node& self) {
        auto& px = *self.parents[0];
        auto& pb = *self.parents[1];
        if (px.requires_grad) {
            auto& g = px.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (pb.requires_grad) {
            auto& g = pb.grad_buffer();
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < m; ++c) g[c] += self.grad[r * m + c];
        }
    });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    Tensor y = matmul_t(x, w);
    check_finite(y.data(), "linear");
    return b.defined() ? add_bias(y, b) : y;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
    require_2d(x, "slice_cols");
    const std::size_t n = x.dim(0), m = x.dim(1);
    if (begin > end || end > m) throw ShapeError("slice_cols: range out of bounds");
    const std::size_t w = end - begin;
    std::vector<double> out(n * w);
    const auto v = x.data();
    for (std::size_t r = 0; r < n; ++r)
        std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r * m + begin), w, out.begin() + static_cast<std::ptrdiff_t>(r * w));
    return make_result({n, w}, std::move(out), {x}, [n, m, w, begin](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < w; ++c) g[r * m + begin + c] += self.grad[r * w + c];
    });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    require_2d(a, "concat_cols");
    require_2d(b, "concat_cols");
    if (a.dim(0) != b.dim(0)) throw ShapeError("concat_cols: row counts differ");
    const std::size_t n = a.dim(0), ma = a.dim(1), mb = b.dim(1), m = ma + mb;
    std::vector<double> out(n * m);
    const auto va = a.data();
    const auto vb = b.data();
    for (std::size_t r = 0; r < n; ++r) {
        std::copy_n(va.begin() + static_cast<std::ptrdiff_t>(r * ma), ma, out.begin() + static_cast<std::ptrdiff_t>(r * m));
        std::copy_n(vb.begin() + static_cast<std::ptrdiff_t>(r * mb), mb, out.begin() + static_cast<std::ptrdiff_t>(r * m + ma));
    }
    return make_result({n, m}, std::move(out), {a, b}, [n, ma, mb, m](Node& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            auto& g = pa.grad_buffer();
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < ma; ++c) g[r * ma + c] += self.grad[r * m + c];
        }
        if (pb.requires_grad) {
            auto& g = pb.grad_buffer();
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < mb; ++c) g[r * mb + c] += self.grad[r * m + ma + c];
        }
    });
}

Tensor gather_rows(const Tensor& x, std::span<const std::uint32_t> index) {
    require_2d(x, "gather_rows");
    const std::size_t n = x.dim(0), m = x.dim(1), e = index.size();
    std::vector<double> out(e * m);
    const auto v = x.data();
    for (std::size_t i = 0; i < e; ++i) {
        if (index[i] >= n) throw ShapeError("gather_rows: index out of range");
        std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(index[i] * m), m, out.begin() + static_cast<std::ptrdiff_t>(i * m));
    }
    std::vector<std::uint32_t> idx(index.begin(), index.end());
    return make_result({e, m}, std::move(out), {x}, [idx = std::move(idx), m](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t c = 0; c < m; ++c) g[idx[i] * m + c] += self.grad[i * m + c];
    });
}

Tensor scatter_sum_rows(const Tensor& x, std::span<const std::uint32_t> index, std::size_t rows) {
    require_2d(x, "scatter_sum_rows");
    const std::size_t e = x.dim(0), m = x.dim(1);
    if (index.size() != e) throw ShapeError("scatter_sum_rows: one index per input row required");
    std::vector<double> out(rows * m, 0.0);
    const auto v = x.data();
    for (std::size_t i = 0; i < e; ++i) {
        if (index[i] >= rows) throw ShapeError("scatter_sum_rows: index out of range");
        for (std::size_t c = 0; c < m; ++c) out[index[i] * m + c] += v[i * m + c];
    }
    std::vector<std::uint32_t> idx(index.begin(), index.end());
    return make_result({rows, m}, std::move(out), {x}, [idx = std::move(idx), m](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t c = 0; c < m; ++c) g[i * m + c] += self.grad[idx[i] * m + c];
    });
}

Tensor edge_message_sum(const Tensor& center, const Tensor& neighbor, const Tensor& bias,
                        std::span<const std::uint32_t> src, std::span<const std::uint32_t> dst, bool apply_relu) {
    require_2d(center, "edge_message_sum");
    require_same_shape(center, neighbor, "edge_message_sum");
    const std::size_t n = center.dim(0), f = center.dim(1);
    if (bias.size() != f) throw ShapeError("edge_message_sum: bias length does not match feature width");
    if (src.size() != dst.size()) throw ShapeError("edge_message_sum: src/dst lengths differ");
    for (std::size_t e = 0; e < src.size(); ++e)
        if (src[e] >= n || dst[e] >= n) throw ShapeError("edge_message_sum: vertex index out of range");

    std::vector<double> out(n * f, 0.0);
    const double* c = center.data().data();
    const double* v = neighbor.data().data();
    const double* b = bias.data().data();
    for (std::size_t e = 0; e < src.size(); ++e) {
        const double* ci = c + src[e] * f;
        const double* vj = v + dst[e] * f;
        double* oi = out.data() + src[e] * f;
        if (apply_relu) {
            for (std::size_t k = 0; k < f; ++k) oi[k] += std::max(ci[k] + vj[k] + b[k], 0.0);
        } else {
            for (std::size_t k = 0; k < f; ++k) oi[k] += ci[k] + vj[k] + b[k];
        }
    }
    std::vector<std::uint32_t> s(src.begin(), src.end());
    std::vector<std::uint32_t> d(dst.begin(), dst.end());
    return make_result({n, f}, std::move(out), {center, neighbor, bias},
                       [s = std::move(s), d = std::move(d), f, apply_relu](Node& self) {
                           Node& pc = *self.parents[0];
                           Node& pv = *self.parents[1];
                           Node& pb = *self.parents[2];
                           double* gc = pc.requires_grad ? pc.grad_buffer().data() : nullptr;
                           double* gv = pv.requires_grad ? pv.grad_buffer().data() : nullptr;
                           double* gb = pb.requires_grad ? pb.grad_buffer().data() : nullptr;
                           const double* c = pc.value.data();
                           const double* v = pv.value.data();
                           const double* b = pb.value.data();
                           std::vector<double> masked(f);
                           for (std::size_t e = 0; e < s.size(); ++e) {
                               const double* ci = c + s[e] * f;
                               const double* vj = v + d[e] * f;
                               const double* go = self.grad.data() + s[e] * f;
                               double* g = masked.data();
                               if (apply_relu) {
                                   for (std::size_t k = 0; k < f; ++k) g[k] = ci[k] + vj[k] + b[k] > 0.0 ? go[k] : 0.0;
                               } else {
                                   for (std::size_t k = 0; k < f; ++k) g[k] = go[k];
                               }
                               if (gc) for (std::size_t k = 0; k < f; ++k) gc[s[e] * f + k] += g[k];
                               if (gv) for (std::size_t k = 0; k < f; ++k) gv[d[e] * f + k] += g[k];
                               if (gb) for (std::size_t k = 0; k < f; ++k) gb[k] += g[k];
                           }
                       });
}

Tensor sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.data()) total += v;
    return make_result({1}, {total}, {x}, [](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (auto& v : g) v += self.grad[0];
    });
}

Tensor row_sum(const Tensor& x) {
    require_2d(x, "row_sum");
    const std::size_t n = x.dim(0), m = x.dim(1);
    std::vector<double> out(n, 0.0);
    const auto v = x.data();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) out[r] += v[r * m + c];
    return make_result({n}, std::move(out), {x}, [n, m](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < m; ++c) g[r * m + c] += self.grad[r];
    });
}

void backward(const Tensor& loss) {
    Node& root = node_of(loss);
    if (root.value.size() != 1)
        throw InvalidInput("backward: loss must be a scalar, got " + std::to_string(root.value.size()) + " elements");
    if (!root.requires_grad) return;

    // Iterative post-order DFS gives a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{&root, 0}};
    seen.insert(&root);
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    root.grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
    for (Node* n : order)
        if (n->parents.empty()) check_finite(n->grad, "gradient");
}

} // namespace iterfilter::nn
