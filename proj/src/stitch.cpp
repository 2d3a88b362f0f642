#include "iterfilter/stitch.hpp"

#include "iterfilter/error.hpp"
#include "iterfilter/kdtree.hpp"
#include "iterfilter/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iterfilter::stitch {

std::vector<double> stitch_weights(std::span<const geo::Vec3> coords) {
    if (coords.empty()) return {};
    double r2 = 0.0;
    for (const auto& c : coords) r2 = std::max(r2, geo::dot(c, c));
    const double r = std::max(std::sqrt(r2), 1e-12);
    const double rs = r * support_ratio;
    const double inv_rs2 = 1.0 / (rs * rs);

    std::vector<double> w(coords.size());
    double total = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        w[i] = std::exp(-geo::dot(coords[i], coords[i]) * inv_rs2);
        total += w[i];
    }
    for (auto& v : w) v /= total;
    return w;
}

std::size_t reference_count(std::size_t n, std::size_t patch_size) {
    if (patch_size == 0) throw InvalidInput("patch size must be positive");
    if (n <= patch_size) return 1;
    return (6 * n + patch_size - 1) / patch_size;
}

namespace {

void add_patch(StitchPlan& plan, const geo::KdTree& tree, const geo::PointCloud& cloud, std::uint32_t ref,
               std::size_t patch_size) {
    graph::Patch patch = graph::extract_patch(tree, cloud[ref], patch_size);
    const double r = patch.radius();
    plan.reference_indices.push_back(ref);
    plan.weights.push_back(stitch_weights(patch));
    plan.patch_radii.push_back(r);
    plan.support_radii.push_back(std::max(r, 1e-12) * support_ratio);
    plan.patches.push_back(std::move(patch));
}

} // namespace

StitchPlan build_stitch_plan(const geo::PointCloud& cloud, std::size_t patch_size, std::uint64_t seed) {
    if (cloud.empty()) throw InvalidInput("cannot build a stitch plan for an empty cloud");
    if (patch_size == 0) throw InvalidInput("patch size must be positive");
    const std::size_t n = cloud.size();
    const std::size_t size = std::min(patch_size, n);
    const geo::KdTree tree(cloud);

    StitchPlan plan;
    const auto refs = geo::farthest_point_sample(cloud, reference_count(n, patch_size), seed);
    plan.fps_count = refs.size();
    std::vector<bool> covered(n, false);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    auto mark = [&](std::uint32_t ref) {
        for (auto idx : plan.patches.back().member_indices) covered[idx] = true;
        for (std::size_t i = 0; i < n; ++i) min_d2[i] = std::min(min_d2[i], geo::squared_distance(cloud[i], cloud[ref]));
    };
    for (auto ref : refs) {
        add_patch(plan, tree, cloud, ref, size);
        mark(ref);
    }

    for (;;) {
        std::int64_t pick = -1;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!covered[i] && min_d2[i] > best) {
                best = min_d2[i];
                pick = static_cast<std::int64_t>(i);
            }
        if (pick < 0) break;
        add_patch(plan, tree, cloud, static_cast<std::uint32_t>(pick), size);
        mark(static_cast<std::uint32_t>(pick));
        ++plan.cover_repairs;
    }
    return plan;
}

std::string to_string(Selection s) {
    return s == Selection::GaussianWeight ? "gaussian" : "nearest_reference";
}

Selection parse_selection(const std::string& name) {
    if (name == "gaussian") return Selection::GaussianWeight;
    if (name == "nearest_reference") return Selection::NearestReference;
    throw InvalidInput("unknown selection rule '" + name + "' (expected gaussian or nearest_reference)");
}

std::vector<Choice> select_by_weights(const StitchPlan& plan, std::size_t cloud_size,
                                      const std::vector<std::vector<double>>& weights) {
    if (weights.size() != plan.patches.size()) throw InvalidInput("one weight list per patch required");
    std::vector<Choice> choice(cloud_size);
    std::vector<double> best(cloud_size, -std::numeric_limits<double>::infinity());
    std::vector<bool> seen(cloud_size, false);
    for (std::size_t p = 0; p < plan.patches.size(); ++p) {
        const auto& members = plan.patches[p].member_indices;
        if (weights[p].size() != members.size()) throw InvalidInput("weight list does not match patch size");
        for (std::size_t s = 0; s < members.size(); ++s) {
            const auto idx = members[s];
            if (idx >= cloud_size) throw InvalidInput("patch member index outside the cloud");
            if (!seen[idx] || weights[p][s] > best[idx]) {
                seen[idx] = true;
                best[idx] = weights[p][s];
                choice[idx] = {static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(s)};
            }
        }
    }
    for (std::size_t i = 0; i < cloud_size; ++i)
        if (!seen[i]) throw CoverError("point " + std::to_string(i) + " is not covered by any patch");
    return choice;
}

std::vector<Choice> select_patches(const StitchPlan& plan, const geo::PointCloud& cloud, Selection rule) {
    if (rule == Selection::GaussianWeight) return select_by_weights(plan, cloud.size(), plan.weights);
    std::vector<std::vector<double>> closeness(plan.patches.size());
    for (std::size_t p = 0; p < plan.patches.size(); ++p) {
        const auto& ref = plan.patches[p].reference;
        for (auto idx : plan.patches[p].member_indices) closeness[p].push_back(-geo::squared_distance(cloud[idx], ref));
    }
    return select_by_weights(plan, cloud.size(), closeness);
}

geo::PointCloud filter_cloud(const geo::PointCloud& cloud, const filter::IterativePFNParams& params,
                             const StitchPlan& plan, const FilterOptions& options) {
    const auto choice = select_patches(plan, cloud, options.selection);
    std::vector<std::vector<geo::Vec3>> results(plan.patches.size());
    parallel_for(plan.patches.size(), options.threads,
                 [&](std::size_t p) { results[p] = filter::patch_displacements(plan.patches[p], params); });

    geo::PointCloud out = cloud;
    for (std::size_t i = 0; i < cloud.size(); ++i) out[i] = cloud[i] + results[choice[i].patch][choice[i].slot];
    return out;
}

geo::PointCloud apply_external_iterations(const geo::PointCloud& cloud, const filter::IterativePFNParams& params,
                                          std::size_t external_iterations, const StitchConfig& config) {
    if (external_iterations < 1) throw InvalidInput("at least one external iteration is required");
    geo::PointCloud current = cloud;
    for (std::size_t e = 0; e < external_iterations; ++e) {
        const auto plan = build_stitch_plan(current, config.patch_size, config.seed);
        current = filter_cloud(current, params, plan, config.filter);
    }
    return current;
}

} // namespace iterfilter::stitch
