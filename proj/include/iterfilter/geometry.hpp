#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace iterfilter::geo {

/// 3D point or vector. A distinct type (rather than an alias of
/// std::array) so the arithmetic below is found by argument lookup.
struct Vec3 : std::array<double, 3> {};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Squared distance, evaluated in a fixed order so every caller
/// (kd-tree, brute force, tests) gets bit-identical values.
inline double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

/// Ordered list of 3D points. Index i refers to the same point across any
/// operation that does not resample.
struct PointCloud {
    std::vector<Vec3> points;

    PointCloud() = default;
    explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const Vec3& operator[](std::size_t i) const { return points[i]; }
    Vec3& operator[](std::size_t i) { return points[i]; }

    bool operator==(const PointCloud&) const = default;
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> faces;

    std::array<Vec3, 3> triangle(std::size_t f) const {
        const auto& t = faces[f];
        return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
    }
    double face_area(std::size_t f) const;
    /// Throws InvalidInput if any face index is out of range.
    void validate() const;
};

/// Maps normalized coordinates back to the input frame: p = center + radius * q.
struct NormalizationTransform {
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 1.0;

    Vec3 apply(const Vec3& p) const { return (1.0 / radius) * (p - center); }
    Vec3 invert(const Vec3& q) const { return center + radius * q; }
    PointCloud invert(const PointCloud& cloud) const;
    TriangleMesh apply(const TriangleMesh& mesh) const;
};

/// Throws InvalidInput on an empty cloud or a non-finite coordinate.
void require_finite(const PointCloud& cloud);

/// Centers the cloud on its bounding sphere and scales it to unit radius.
///
/// The sphere is found with Ritter's two-pass approximation, then the radius
/// is replaced by the exact maximum distance from the chosen center, so the
/// farthest output point has norm 1. A zero radius is clamped to 1.
std::pair<PointCloud, NormalizationTransform> normalize_to_unit_sphere(const PointCloud& cloud);

/// Exhaustive m-nearest-neighbor scan; ascending by distance, ties by index.
std::vector<std::uint32_t> knn_brute_force(const Vec3& query, std::span<const Vec3> points, std::size_t m);

/// m nearest neighbors of `query` in `cloud`, ascending by distance with
/// ties broken by lower index. Uses a kd-tree above 64 points.
std::vector<std::uint32_t> knn(const Vec3& query, const PointCloud& cloud, std::size_t m);

/// Farthest point sampling; the first index is drawn from `seed`.
std::vector<std::uint32_t> farthest_point_sample(const PointCloud& cloud, std::size_t count, std::uint64_t seed);

/// Farthest point sampling from an explicit start index.
std::vector<std::uint32_t> farthest_point_sample_from(const PointCloud& cloud, std::size_t count, std::uint32_t start);

/// Area-weighted face choice with uniform barycentric coordinates.
PointCloud sample_mesh_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Closest point on the closed triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Exact Euclidean distance from p to the closed triangle. Degenerate
/// triangles fall back to the nearest of their edges.
double point_to_triangle_distance(const Vec3& p, const std::array<Vec3, 3>& tri);

// Analytic meshes for the desk-scale dataset. All are centered at the origin.
TriangleMesh make_icosphere(int subdivisions, double radius = 1.0);
TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments);
TriangleMesh make_cylinder(double radius, double height, int segments, int height_segments);
TriangleMesh make_rounded_box(double half_extent, double corner_radius, int subdivisions);

} // namespace iterfilter::geo
