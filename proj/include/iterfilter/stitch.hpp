#pragma once

#include "iterfilter/geometry.hpp"
#include "iterfilter/graph.hpp"
#include "iterfilter/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace iterfilter::stitch {

/// Support radius as a fraction of the patch radius.
inline constexpr double support_ratio = 1.0 / 3.0;

/// Normalized Gaussian proximity weights
///   w_i = exp(-|c_i|^2 / r_s^2) / sum_j exp(-|c_j|^2 / r_s^2),  r_s = r / 3,
/// where c_i are coordinates relative to the reference point and r is the
/// largest |c_i| (clamped below at 1e-12).
std::vector<double> stitch_weights(std::span<const geo::Vec3> coords);
inline std::vector<double> stitch_weights(const graph::Patch& patch) { return stitch_weights(patch.coords); }

struct StitchPlan {
    std::vector<std::uint32_t> reference_indices;
    std::vector<graph::Patch> patches;
    std::vector<std::vector<double>> weights;
    std::vector<double> patch_radii;
    std::vector<double> support_radii;
    std::size_t fps_count = 0;    // references placed by farthest point sampling
    std::size_t cover_repairs = 0; // references added to cover leftover points

    std::size_t patch_count() const { return patches.size(); }
};

/// Number of FPS references for a cloud of n points: ceil(6 n / patch_size),
/// i.e. 300 patches for 50K points at patch size 1000.
std::size_t reference_count(std::size_t n, std::size_t patch_size);

/// FPS references, one patch of `patch_size` nearest neighbors each, then
/// extra references at uncovered points (farthest from the existing
/// references first) until every point lies in some patch. A cloud no
/// larger than patch_size becomes a single patch.
StitchPlan build_stitch_plan(const geo::PointCloud& cloud, std::size_t patch_size = graph::default_patch_size,
                             std::uint64_t seed = 0);

enum class Selection {
    GaussianWeight,   // patch in which the point's weight is largest
    NearestReference, // patch whose reference point is nearest (ablation baseline)
};

std::string to_string(Selection s);
Selection parse_selection(const std::string& name);

struct Choice {
    std::uint32_t patch = 0;
    std::uint32_t slot = 0; // position of the point inside that patch
};

/// Per-point argmax of `weights` (shaped like plan.patches); ties go to the
/// lower patch index. Throws CoverError if a point is in no patch.
std::vector<Choice> select_by_weights(const StitchPlan& plan, std::size_t cloud_size,
                                      const std::vector<std::vector<double>>& weights);

std::vector<Choice> select_patches(const StitchPlan& plan, const geo::PointCloud& cloud, Selection rule);

struct FilterOptions {
    Selection selection = Selection::GaussianWeight;
    unsigned threads = 1;
};

/// Filters every patch independently, then takes each point's result from
/// its selected patch. Output order matches input order; the thread count
/// does not affect the result.
geo::PointCloud filter_cloud(const geo::PointCloud& cloud, const filter::IterativePFNParams& params,
                             const StitchPlan& plan, const FilterOptions& options = {});

struct StitchConfig {
    std::size_t patch_size = graph::default_patch_size;
    std::uint64_t seed = 0;
    FilterOptions filter;
};

/// Repeats plan construction and stitched filtering E times, each pass
/// consuming the previous output.
geo::PointCloud apply_external_iterations(const geo::PointCloud& cloud, const filter::IterativePFNParams& params,
                                          std::size_t external_iterations, const StitchConfig& config = {});

} // namespace iterfilter::stitch
