#include "iterfilter/geometry.hpp"

#include "iterfilter/error.hpp"

#include <algorithm>
#include <map>
#include <numbers>

namespace iterfilter::geo {

namespace {

Vec3 normalized(const Vec3& v) { return (1.0 / norm(v)) * v; }

using Face = std::array<std::uint32_t, 3>;

std::uint32_t push(TriangleMesh& m, const Vec3& v) {
    m.vertices.push_back(v);
    return static_cast<std::uint32_t>(m.vertices.size() - 1);
}

} // namespace

TriangleMesh make_icosphere(int subdivisions, double radius) {
    if (subdivisions < 0) throw InvalidInput("make_icosphere: negative subdivision count");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh m;
    for (const Vec3& v : std::initializer_list<Vec3>{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                                                     {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                                                     {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}})
        m.vertices.push_back(normalized(v));
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
               {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            const auto id = push(m, normalized(0.5 * (m.vertices[a] + m.vertices[b])));
            midpoints.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            const auto ab = midpoint(f[0], f[1]);
            const auto bc = midpoint(f[1], f[2]);
            const auto ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    for (auto& v : m.vertices) v = radius * v;
    return m;
}

TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments) {
    if (major_segments < 3 || minor_segments < 3) throw InvalidInput("make_torus: need at least 3 segments");
    TriangleMesh m;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < major_segments; ++i) {
        const double u = two_pi * i / major_segments;
        for (int j = 0; j < minor_segments; ++j) {
            const double v = two_pi * j / minor_segments;
            const double ring = major_radius + minor_radius * std::cos(v);
            m.vertices.push_back({ring * std::cos(u), ring * std::sin(u), minor_radius * std::sin(v)});
        }
    }
    auto id = [&](int i, int j) {
        return static_cast<std::uint32_t>((i % major_segments) * minor_segments + (j % minor_segments));
    };
    for (int i = 0; i < major_segments; ++i)
        for (int j = 0; j < minor_segments; ++j) {
            m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments, int height_segments) {
    if (segments < 3 || height_segments < 1) throw InvalidInput("make_cylinder: too few segments");
    TriangleMesh m;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int h = 0; h <= height_segments; ++h) {
        const double z = -0.5 * height + height * h / height_segments;
        for (int s = 0; s < segments; ++s) {
            const double a = two_pi * s / segments;
            m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z});
        }
    }
    auto id = [&](int h, int s) { return static_cast<std::uint32_t>(h * segments + (s % segments)); };
    for (int h = 0; h < height_segments; ++h)
        for (int s = 0; s < segments; ++s) {
            m.faces.push_back({id(h, s), id(h, s + 1), id(h + 1, s + 1)});
            m.faces.push_back({id(h, s), id(h + 1, s + 1), id(h + 1, s)});
        }
    const auto bottom = push(m, {0.0, 0.0, -0.5 * height});
    const auto top = push(m, {0.0, 0.0, 0.5 * height});
    for (int s = 0; s < segments; ++s) {
        m.faces.push_back({bottom, id(0, s + 1), id(0, s)});
        m.faces.push_back({top, id(height_segments, s), id(height_segments, s + 1)});
    }
    return m;
}

TriangleMesh make_rounded_box(double half_extent, double corner_radius, int subdivisions) {
    if (subdivisions < 1) throw InvalidInput("make_rounded_box: need at least one subdivision");
    if (!(corner_radius >= 0.0 && corner_radius < half_extent))
        throw InvalidInput("make_rounded_box: corner radius must lie in [0, half_extent)");
    const double inner = half_extent - corner_radius;
    TriangleMesh m;
    const int n = subdivisions;
    // Six cube faces, each an (n+1)^2 grid; vertices are pushed onto the rounded surface.
    for (int axis = 0; axis < 3; ++axis)
        for (int sign : {-1, 1}) {
            const int ua = (axis + 1) % 3;
            const int va = (axis + 2) % 3;
            const auto base = static_cast<std::uint32_t>(m.vertices.size());
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j) {
                    Vec3 p{};
                    p[axis] = sign * half_extent;
                    p[ua] = -half_extent + 2.0 * half_extent * i / n;
                    p[va] = -half_extent + 2.0 * half_extent * j / n;
                    Vec3 q{};
                    for (int a = 0; a < 3; ++a) q[a] = std::clamp(p[a], -inner, inner);
                    const Vec3 off = p - q;
                    m.vertices.push_back(corner_radius > 0.0 ? q + corner_radius * normalized(off) : p);
                }
            auto id = [&](int i, int j) { return base + static_cast<std::uint32_t>(i * (n + 1) + j); };
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (sign > 0) {
                        m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                        m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
                    } else {
                        m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
                        m.faces.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
                    }
                }
        }
    return m;
}

} // namespace iterfilter::geo
