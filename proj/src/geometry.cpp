#include "iterfilter/geometry.hpp"

#include "iterfilter/error.hpp"
#include "iterfilter/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace iterfilter::geo {

double TriangleMesh::face_area(std::size_t f) const {
    const auto [a, b, c] = triangle(f);
    return 0.5 * norm(cross(b - a, c - a));
}

void TriangleMesh::validate() const {
    for (std::size_t f = 0; f < faces.size(); ++f)
        for (auto v : faces[f])
            if (v >= vertices.size())
                throw InvalidInput("mesh face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                                   " but only " + std::to_string(vertices.size()) + " vertices exist");
}

PointCloud NormalizationTransform::invert(const PointCloud& cloud) const {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& q : cloud.points) out.points.push_back(invert(q));
    return out;
}

TriangleMesh NormalizationTransform::apply(const TriangleMesh& mesh) const {
    TriangleMesh out = mesh;
    for (auto& v : out.vertices) v = apply(v);
    return out;
}

void require_finite(const PointCloud& cloud) {
    if (cloud.empty()) throw InvalidInput("point cloud is empty");
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (double c : cloud[i])
            if (!std::isfinite(c)) throw InvalidInput("point " + std::to_string(i) + " has a non-finite coordinate");
}

std::pair<PointCloud, NormalizationTransform> normalize_to_unit_sphere(const PointCloud& cloud) {
    require_finite(cloud);
    const auto& pts = cloud.points;

    auto farthest_from = [&](const Vec3& q) {
        std::size_t best = 0;
        double best_d2 = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double d2 = squared_distance(q, pts[i]);
            if (d2 > best_d2) {
                best_d2 = d2;
                best = i;
            }
        }
        return best;
    };

    // Ritter: seed from an approximately diametral pair, then grow.
    const Vec3 y = pts[farthest_from(pts[0])];
    const Vec3 z = pts[farthest_from(y)];
    Vec3 center = 0.5 * (y + z);
    double radius = 0.5 * norm(z - y);
    for (const auto& p : pts) {
        const double d = norm(p - center);
        if (d > radius) {
            const double grown = 0.5 * (radius + d);
            center = center + ((grown - radius) / d) * (p - center);
            radius = grown;
        }
    }

    // Exact radius about the chosen center.
    double max_d2 = 0.0;
    for (const auto& p : pts) max_d2 = std::max(max_d2, squared_distance(p, center));
    radius = std::sqrt(max_d2);
    if (!(radius > 0.0)) radius = 1.0;

    NormalizationTransform transform{center, radius};
    PointCloud out;
    out.points.reserve(pts.size());
    for (const auto& p : pts) out.points.push_back(transform.apply(p));
    return {std::move(out), transform};
}

namespace {

std::vector<std::uint32_t> fps_impl(const PointCloud& cloud, std::size_t count, std::uint32_t start) {
    std::vector<std::uint32_t> picked;
    picked.reserve(count);
    if (count == 0) return picked;
    std::vector<double> min_d2(cloud.size(), std::numeric_limits<double>::infinity());
    std::vector<bool> taken(cloud.size(), false);
    std::uint32_t current = start;
    for (std::size_t r = 0; r < count; ++r) {
        picked.push_back(current);
        taken[current] = true;
        const Vec3 c = cloud[current];
        std::uint32_t next = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            min_d2[i] = std::min(min_d2[i], squared_distance(cloud[i], c));
            if (!taken[i] && min_d2[i] > best) {
                best = min_d2[i];
                next = static_cast<std::uint32_t>(i);
            }
        }
        current = next;
    }
    return picked;
}

void check_fps_args(const PointCloud& cloud, std::size_t count) {
    if (count > cloud.size())
        throw InvalidInput("farthest_point_sample: count " + std::to_string(count) + " exceeds cloud size " +
                           std::to_string(cloud.size()));
    if (count == 0) throw InvalidInput("farthest_point_sample: count must be at least 1");
}

} // namespace

std::vector<std::uint32_t> farthest_point_sample(const PointCloud& cloud, std::size_t count, std::uint64_t seed) {
    check_fps_args(cloud, count);
    Rng rng(seed);
    return fps_impl(cloud, count, static_cast<std::uint32_t>(rng.index(cloud.size())));
}

std::vector<std::uint32_t> farthest_point_sample_from(const PointCloud& cloud, std::size_t count,
                                                      std::uint32_t start) {
    check_fps_args(cloud, count);
    if (start >= cloud.size()) throw InvalidInput("farthest_point_sample: start index out of range");
    return fps_impl(cloud, count, start);
}

PointCloud sample_mesh_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    mesh.validate();
    std::vector<double> cumulative(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        total += mesh.face_area(f);
        cumulative[f] = total;
    }
    if (!(total > 0.0)) throw InvalidInput("sample_mesh_uniform: mesh has no face with positive area");

    Rng rng(seed);
    PointCloud out;
    out.points.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double target = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        if (it == cumulative.end()) --it;
        const auto [a, b, c] = mesh.triangle(static_cast<std::size_t>(it - cumulative.begin()));
        const double r1 = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        const double wa = 1.0 - r1;
        const double wb = r1 * (1.0 - r2);
        const double wc = r1 * r2;
        out.points.push_back(wa * a + wb * b + wc * c);
    }
    return out;
}

namespace {

Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

} // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 n = cross(ab, ac);
    const double scale = std::max({dot(ab, ab), dot(ac, ac), dot(c - b, c - b)});
    if (dot(n, n) <= 1e-24 * scale * scale) {
        Vec3 best = closest_point_on_segment(p, a, b);
        for (const Vec3& q : {closest_point_on_segment(p, b, c), closest_point_on_segment(p, c, a)})
            if (squared_distance(p, q) < squared_distance(p, best)) best = q;
        return best;
    }

    // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
    const Vec3 ap = p - a;
    const double d1 = dot(ab, ap);
    const double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp);
    const double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp);
    const double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return a + v * ab + w * ac;
}

double point_to_triangle_distance(const Vec3& p, const std::array<Vec3, 3>& tri) {
    return norm(p - closest_point_on_triangle(p, tri[0], tri[1], tri[2]));
}

} // namespace iterfilter::geo
