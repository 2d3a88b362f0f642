#include "iterfilter/kdtree.hpp"

#include "iterfilter/error.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

namespace iterfilter::geo {

namespace {

struct Candidate {
    double d2;
    std::uint32_t index;
    bool operator<(const Candidate& o) const {
        return d2 < o.d2 || (d2 == o.d2 && index < o.index);
    }
};

// Max-heap on (distance, index); the top is the current worst kept neighbor.
class BoundedHeap {
public:
    explicit BoundedHeap(std::size_t capacity) : capacity_(capacity) { heap_.reserve(capacity + 1); }

    bool full() const { return heap_.size() == capacity_; }
    double worst() const { return heap_.front().d2; }

    void offer(Candidate c) {
        if (!full()) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (c < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    std::vector<std::uint32_t> sorted_indices() {
        std::sort_heap(heap_.begin(), heap_.end());
        std::vector<std::uint32_t> out(heap_.size());
        for (std::size_t i = 0; i < heap_.size(); ++i) out[i] = heap_[i].index;
        return out;
    }

private:
    std::size_t capacity_;
    std::vector<Candidate> heap_;
};

} // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (points_.size() >= brute_force_below) {
        nodes_.reserve(2 * points_.size() / leaf_size + 1);
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size) return id;

    Vec3 lo = points_[order_[begin]];
    Vec3 hi = lo;
    for (std::uint32_t i = begin; i < end; ++i) {
        const auto& p = points_[order_[i]];
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    if (hi[axis] == lo[axis]) return id; // all points coincide

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return points_[a][axis] < points_[b][axis] ||
                                (points_[a][axis] == points_[b][axis] && a < b);
                     });
    const double split = points_[order_[mid]][axis];

    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

std::vector<std::uint32_t> KdTree::knn(const Vec3& query, std::size_t m) const {
    if (m > points_.size())
        throw InvalidInput("knn: requested " + std::to_string(m) + " neighbors from " +
                           std::to_string(points_.size()) + " points");
    if (m == 0) return {};
    if (nodes_.empty()) return knn_brute_force(query, points_, m);

    BoundedHeap heap(m);
    // Left children hold coordinates <= split, right children >= split.
    auto visit = [&](auto&& self, std::int32_t id) -> void {
        const Node& node = nodes_[id];
        if (node.axis < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const auto idx = order_[i];
                heap.offer({squared_distance(query, points_[idx]), idx});
            }
            return;
        }
        const double diff = query[node.axis] - node.split;
        const std::int32_t near = diff <= 0.0 ? node.left : node.right;
        const std::int32_t far = diff <= 0.0 ? node.right : node.left;
        self(self, near);
        if (!heap.full() || diff * diff <= heap.worst()) self(self, far);
    };
    visit(visit, 0);
    return heap.sorted_indices();
}

std::uint32_t KdTree::nearest(const Vec3& query) const {
    return knn(query, 1).front();
}

std::vector<std::uint32_t> knn_brute_force(const Vec3& query, std::span<const Vec3> points, std::size_t m) {
    if (m > points.size())
        throw InvalidInput("knn: requested " + std::to_string(m) + " neighbors from " +
                           std::to_string(points.size()) + " points");
    std::vector<Candidate> all(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        all[i] = {squared_distance(query, points[i]), static_cast<std::uint32_t>(i)};
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end());
    std::vector<std::uint32_t> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = all[i].index;
    return out;
}

std::vector<std::uint32_t> knn(const Vec3& query, const PointCloud& cloud, std::size_t m) {
    if (m > cloud.size())
        throw InvalidInput("knn: requested " + std::to_string(m) + " neighbors from " +
                           std::to_string(cloud.size()) + " points");
    if (cloud.size() < KdTree::brute_force_below) return knn_brute_force(query, cloud.points, m);
    return KdTree(cloud).knn(query, m);
}

} // namespace iterfilter::geo
