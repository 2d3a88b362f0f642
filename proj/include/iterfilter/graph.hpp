#pragma once

#include "iterfilter/geometry.hpp"
#include "iterfilter/kdtree.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace iterfilter::graph {

inline constexpr std::size_t default_patch_size = 1000;
inline constexpr std::size_t default_target_size = 1200;
inline constexpr std::size_t default_k = 32;

/// Neighborhood of a reference point, stored relative to that point:
/// coords[i] == parent[member_indices[i]] - reference.
struct Patch {
    geo::Vec3 reference{};
    std::vector<std::uint32_t> member_indices;
    std::vector<geo::Vec3> coords;

    std::size_t size() const { return coords.size(); }
    /// Distance from the reference to the farthest member.
    double radius() const;
};

/// The m nearest neighbors of `reference` in the tree's point set.
Patch extract_patch(const geo::KdTree& tree, const geo::Vec3& reference, std::size_t m);

struct TrainingPair {
    Patch noisy;
    Patch clean;
};

/// Both patches are centered at the noisy reference point noisy[ref_index].
TrainingPair extract_training_pair(const geo::PointCloud& noisy, const geo::PointCloud& clean, std::size_t ref_index,
                                   std::size_t noisy_size = default_patch_size,
                                   std::size_t clean_size = default_target_size);

struct Edge {
    std::uint32_t from;
    std::uint32_t to;
    bool operator==(const Edge&) const = default;
};

/// Directed kNN graph; edges are grouped by source vertex in ascending
/// vertex order, and each group is ordered by ascending distance.
struct DirectedGraph {
    std::size_t vertex_count = 0;
    std::vector<Edge> edges;

    std::vector<std::uint32_t> sources() const;
    std::vector<std::uint32_t> targets() const;
};

/// Out-degree min(k, n - 1), no self loops.
DirectedGraph build_patch_graph(std::span<const geo::Vec3> coords, std::size_t k = default_k);
inline DirectedGraph build_patch_graph(const Patch& patch, std::size_t k = default_k) {
    return build_patch_graph(std::span<const geo::Vec3>(patch.coords), k);
}

} // namespace iterfilter::graph
