#pragma once

#include "iterfilter/geometry.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace iterfilter::metrics {

inline constexpr double report_scale = 1e5;

/// mean_x min_y |x - y|^2 + mean_y min_x |x - y|^2
double chamfer_distance(const geo::PointCloud& x, const geo::PointCloud& y);

/// Unsquared distance from each point to the nearest mesh face.
std::vector<double> point_mesh_distances(const geo::PointCloud& x, const geo::TriangleMesh& mesh, unsigned threads = 1);

/// Mean squared point-to-mesh distance (points to faces only).
double point_to_mesh(const geo::PointCloud& x, const geo::TriangleMesh& mesh, unsigned threads = 1);

struct DistanceHistogram {
    std::vector<double> edges; // bins + 1 entries, uniform over [0, max distance]
    std::vector<std::size_t> counts;
    double mean = 0.0;
    double max = 0.0;
};

/// Bins the given distances; a zero maximum puts everything in bin 0.
DistanceHistogram histogram_of(const std::vector<double>& distances, std::size_t bins);
DistanceHistogram distance_histogram(const geo::PointCloud& x, const geo::TriangleMesh& mesh, std::size_t bins,
                                     unsigned threads = 1);

struct EvalReport {
    double cd = 0.0;  // raw value
    double p2m = 0.0; // raw value
    DistanceHistogram histogram;
    nlohmann::json metadata = nlohmann::json::object();
};

/// JSON with cd and p2m multiplied by 1e5.
nlohmann::json to_json(const EvalReport& report);
/// Throws InvalidInput when `j` does not follow the report layout.
void validate_report_json(const nlohmann::json& j);
EvalReport report_from_json(const nlohmann::json& j);

/// CSV "bin_lo,bin_hi,count".
void write_histogram_csv(const std::filesystem::path& path, const DistanceHistogram& h);

} // namespace iterfilter::metrics
