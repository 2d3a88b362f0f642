#include "iterfilter/io.hpp"

#include "iterfilter/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace iterfilter::io {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
    throw IoError(source + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

bool parse_double(std::string_view tok, double& out) {
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

template <typename Int>
bool parse_int(std::string_view tok, Int& out) {
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end;
}

bool skippable(std::string_view line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

geo::PointCloud read_xyz(std::istream& in, const std::string& source) {
    geo::PointCloud cloud;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skippable(line)) continue;
        const auto tok = split_ws(line);
        if (tok.size() != 3) fail(source, lineno, "expected 3 coordinates, found " + std::to_string(tok.size()));
        geo::Vec3 p{};
        for (int a = 0; a < 3; ++a)
            if (!parse_double(tok[a], p[a])) fail(source, lineno, "invalid coordinate '" + std::string(tok[a]) + "'");
        cloud.points.push_back(p);
    }
    return cloud;
}

geo::PointCloud read_xyz(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_xyz(in, path.string());
}

void write_xyz(std::ostream& out, const geo::PointCloud& cloud) {
    for (const auto& p : cloud.points)
        out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2]) << '\n';
}

void write_xyz(const std::filesystem::path& path, const geo::PointCloud& cloud) {
    auto out = open_out(path);
    write_xyz(out, cloud);
    if (!out) throw IoError("failed writing " + path.string());
}

geo::TriangleMesh read_off(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    auto next_content = [&]() -> std::vector<std::string_view> {
        while (std::getline(in, line)) {
            ++lineno;
            if (!skippable(line)) return split_ws(line);
        }
        fail(source, lineno, "unexpected end of file");
    };

    auto header = next_content();
    std::size_t nv = 0;
    std::size_t nf = 0;
    std::size_t ne = 0;
    // The counts may share the header line ("OFF 8 12 0").
    if (header.empty() || header[0] != "OFF") fail(source, lineno, "missing OFF header");
    if (header.size() == 1) header = next_content();
    else header.erase(header.begin());
    if (header.size() != 3 || !parse_int(header[0], nv) || !parse_int(header[1], nf) || !parse_int(header[2], ne))
        fail(source, lineno, "expected 'vertex_count face_count edge_count'");

    geo::TriangleMesh mesh;
    mesh.vertices.reserve(nv);
    mesh.faces.reserve(nf);
    for (std::size_t i = 0; i < nv; ++i) {
        const auto tok = next_content();
        if (tok.size() != 3) fail(source, lineno, "vertex line needs 3 coordinates");
        geo::Vec3 p{};
        for (int a = 0; a < 3; ++a)
            if (!parse_double(tok[a], p[a])) fail(source, lineno, "invalid coordinate '" + std::string(tok[a]) + "'");
        mesh.vertices.push_back(p);
    }
    for (std::size_t f = 0; f < nf; ++f) {
        const auto tok = next_content();
        std::size_t arity = 0;
        if (tok.empty() || !parse_int(tok[0], arity) || arity != 3 || tok.size() != 4)
            fail(source, lineno, "face line must be '3 i j k'");
        std::array<std::uint32_t, 3> face{};
        for (int a = 0; a < 3; ++a) {
            if (!parse_int(tok[a + 1], face[a])) fail(source, lineno, "invalid vertex index");
            if (face[a] >= nv) fail(source, lineno, "vertex index " + std::to_string(face[a]) + " out of range");
        }
        mesh.faces.push_back(face);
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (!skippable(line)) fail(source, lineno, "trailing content after last face");
    }
    return mesh;
}

geo::TriangleMesh read_off(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_off(in, path.string());
}

void write_off(std::ostream& out, const geo::TriangleMesh& mesh) {
    out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
    for (const auto& v : mesh.vertices)
        out << format_double(v[0]) << ' ' << format_double(v[1]) << ' ' << format_double(v[2]) << '\n';
    for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_off(const std::filesystem::path& path, const geo::TriangleMesh& mesh) {
    auto out = open_out(path);
    write_off(out, mesh);
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace iterfilter::io
