#include "iterfilter/graph.hpp"

#include "iterfilter/error.hpp"

#include <algorithm>
#include <string>

namespace iterfilter::graph {

double Patch::radius() const {
    double r2 = 0.0;
    for (const auto& c : coords) r2 = std::max(r2, geo::dot(c, c));
    return std::sqrt(r2);
}

Patch extract_patch(const geo::KdTree& tree, const geo::Vec3& reference, std::size_t m) {
    Patch p;
    p.reference = reference;
    p.member_indices = tree.knn(reference, m);
    p.coords.reserve(m);
    for (auto idx : p.member_indices) p.coords.push_back(tree.points()[idx] - reference);
    return p;
}

TrainingPair extract_training_pair(const geo::PointCloud& noisy, const geo::PointCloud& clean, std::size_t ref_index,
                                   std::size_t noisy_size, std::size_t clean_size) {
    if (ref_index >= noisy.size())
        throw InvalidInput("reference index " + std::to_string(ref_index) + " out of range");
    if (noisy.size() < noisy_size)
        throw InvalidInput("noisy cloud has " + std::to_string(noisy.size()) + " points, patch needs " +
                           std::to_string(noisy_size));
    if (clean.size() < clean_size)
        throw InvalidInput("clean cloud has " + std::to_string(clean.size()) + " points, target needs " +
                           std::to_string(clean_size));
    const geo::Vec3 ref = noisy[ref_index];
    return {extract_patch(geo::KdTree(noisy), ref, noisy_size), extract_patch(geo::KdTree(clean), ref, clean_size)};
}

std::vector<std::uint32_t> DirectedGraph::sources() const {
    std::vector<std::uint32_t> out(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) out[e] = edges[e].from;
    return out;
}

std::vector<std::uint32_t> DirectedGraph::targets() const {
    std::vector<std::uint32_t> out(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) out[e] = edges[e].to;
    return out;
}

DirectedGraph build_patch_graph(std::span<const geo::Vec3> coords, std::size_t k) {
    DirectedGraph g;
    g.vertex_count = coords.size();
    if (coords.empty()) return g;
    const std::size_t degree = std::min(k, coords.size() - 1);
    if (degree == 0) return g;
    g.edges.reserve(coords.size() * degree);

    const geo::KdTree tree(coords);
    const std::size_t query = std::min(degree + 1, coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const auto nbrs = tree.knn(coords[i], query);
        std::size_t added = 0;
        for (auto j : nbrs) {
            if (j == i) continue;
            if (added == degree) break;
            g.edges.push_back({static_cast<std::uint32_t>(i), j});
            ++added;
        }
    }
    return g;
}

} // namespace iterfilter::graph
