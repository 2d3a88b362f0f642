#include "iterfilter/metrics.hpp"

#include "iterfilter/error.hpp"
#include "iterfilter/io.hpp"
#include "iterfilter/kdtree.hpp"
#include "iterfilter/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

namespace iterfilter::metrics {

namespace {

double directed_mean_sq(const geo::PointCloud& from, const geo::KdTree& to) {
    double total = 0.0;
    for (const auto& p : from.points) total += geo::squared_distance(p, to.points()[to.nearest(p)]);
    return total / static_cast<double>(from.size());
}

} // namespace

double chamfer_distance(const geo::PointCloud& x, const geo::PointCloud& y) {
    if (x.empty() || y.empty()) throw InvalidInput("chamfer_distance needs two non-empty clouds");
    return directed_mean_sq(x, geo::KdTree(y)) + directed_mean_sq(y, geo::KdTree(x));
}

std::vector<double> point_mesh_distances(const geo::PointCloud& x, const geo::TriangleMesh& mesh, unsigned threads) {
    if (x.empty()) throw InvalidInput("point-to-mesh distance needs a non-empty cloud");
    if (mesh.faces.empty()) throw InvalidInput("point-to-mesh distance needs a mesh with faces");
    mesh.validate();
    std::vector<double> out(x.size());
    parallel_for(x.size(), threads, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < mesh.faces.size(); ++f)
            best = std::min(best, geo::point_to_triangle_distance(x[i], mesh.triangle(f)));
        out[i] = best;
    });
    return out;
}

double point_to_mesh(const geo::PointCloud& x, const geo::TriangleMesh& mesh, unsigned threads) {
    const auto d = point_mesh_distances(x, mesh, threads);
    double total = 0.0;
    for (double v : d) total += v * v;
    return total / static_cast<double>(d.size());
}

DistanceHistogram histogram_of(const std::vector<double>& distances, std::size_t bins) {
    if (bins < 1) throw InvalidInput("histogram needs at least one bin");
    if (distances.empty()) throw InvalidInput("histogram needs at least one distance");
    DistanceHistogram h;
    h.max = *std::max_element(distances.begin(), distances.end());
    double total = 0.0;
    for (double d : distances) total += d;
    h.mean = total / static_cast<double>(distances.size());
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = h.max * static_cast<double>(b) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double d : distances) {
        std::size_t b = 0;
        if (h.max > 0.0) b = std::min(bins - 1, static_cast<std::size_t>(d / h.max * static_cast<double>(bins)));
        ++h.counts[b];
    }
    return h;
}

DistanceHistogram distance_histogram(const geo::PointCloud& x, const geo::TriangleMesh& mesh, std::size_t bins,
                                     unsigned threads) {
    if (bins < 1) throw InvalidInput("histogram needs at least one bin");
    return histogram_of(point_mesh_distances(x, mesh, threads), bins);
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j;
    j["format"] = "iterfilter-eval";
    j["version"] = 1;
    j["scale"] = report_scale;
    j["cd"] = r.cd * report_scale;
    j["p2m"] = r.p2m * report_scale;
    j["mean_distance"] = r.histogram.mean;
    j["max_distance"] = r.histogram.max;
    j["histogram"] = {{"edges", r.histogram.edges}, {"counts", r.histogram.counts}};
    j["metadata"] = r.metadata;
    return j;
}

void validate_report_json(const nlohmann::json& j) {
    auto require = [&](bool ok, const std::string& what) {
        if (!ok) throw InvalidInput("eval report: " + what);
    };
    require(j.is_object(), "not an object");
    for (const char* key : {"format", "version", "scale", "cd", "p2m", "mean_distance", "max_distance", "histogram",
                            "metadata"})
        require(j.contains(key), std::string("missing key '") + key + "'");
    for (auto it = j.begin(); it != j.end(); ++it)
        require(it.key() == "format" || it.key() == "version" || it.key() == "scale" || it.key() == "cd" ||
                    it.key() == "p2m" || it.key() == "mean_distance" || it.key() == "max_distance" ||
                    it.key() == "histogram" || it.key() == "metadata",
                "unknown key '" + it.key() + "'");
    require(j["format"] == "iterfilter-eval" && j["version"] == 1, "unsupported format or version");
    for (const char* key : {"scale", "cd", "p2m", "mean_distance", "max_distance"})
        require(j[key].is_number() && j[key].get<double>() >= 0.0, std::string("'") + key + "' must be a non-negative number");
    const auto& h = j["histogram"];
    require(h.is_object() && h.contains("edges") && h.contains("counts"), "histogram needs edges and counts");
    require(h["edges"].is_array() && h["counts"].is_array(), "histogram edges/counts must be arrays");
    require(h["counts"].size() >= 1 && h["edges"].size() == h["counts"].size() + 1, "histogram needs bins + 1 edges");
    for (const auto& c : h["counts"]) require(c.is_number_unsigned(), "histogram counts must be non-negative integers");
    for (const auto& e : h["edges"]) require(e.is_number(), "histogram edges must be numbers");
    require(j["metadata"].is_object(), "metadata must be an object");
}

EvalReport report_from_json(const nlohmann::json& j) {
    validate_report_json(j);
    EvalReport r;
    const double scale = j["scale"].get<double>();
    r.cd = j["cd"].get<double>() / scale;
    r.p2m = j["p2m"].get<double>() / scale;
    r.histogram.mean = j["mean_distance"].get<double>();
    r.histogram.max = j["max_distance"].get<double>();
    r.histogram.edges = j["histogram"]["edges"].get<std::vector<double>>();
    r.histogram.counts = j["histogram"]["counts"].get<std::vector<std::size_t>>();
    r.metadata = j["metadata"];
    return r;
}

void write_histogram_csv(const std::filesystem::path& path, const DistanceHistogram& h) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out << io::format_double(h.edges[b]) << ',' << io::format_double(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
}

} // namespace iterfilter::metrics
