#pragma once

#include "iterfilter/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace iterfilter::geo {

/// Static 3D kd-tree for exact k-nearest-neighbor queries.
///
/// Results are identical to an exhaustive scan: ascending squared distance,
/// equal distances ordered by lower point index. Immutable after
/// construction and safe to query from several threads.
class KdTree {
public:
    static constexpr std::size_t leaf_size = 16;
    static constexpr std::size_t brute_force_below = 64;

    KdTree() = default;
    explicit KdTree(std::span<const Vec3> points);
    explicit KdTree(const PointCloud& cloud) : KdTree(std::span<const Vec3>(cloud.points)) {}

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

    /// Throws InvalidInput if m > size().
    std::vector<std::uint32_t> knn(const Vec3& query, std::size_t m) const;

    /// Index of the nearest point; the tree must be non-empty.
    std::uint32_t nearest(const Vec3& query) const;

private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        int axis = -1;
        double split = 0.0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

} // namespace iterfilter::geo
