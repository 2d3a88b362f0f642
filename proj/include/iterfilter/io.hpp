#pragma once

#include "iterfilter/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace iterfilter::io {

/// ASCII XYZ: one "x y z" triple per line, '#' comment lines and blank
/// lines ignored. Any other malformed line is an IoError naming the line.
geo::PointCloud read_xyz(std::istream& in, const std::string& source = "<stream>");
geo::PointCloud read_xyz(const std::filesystem::path& path);

/// Writes with 17 significant digits so a read-back is bit-exact.
void write_xyz(std::ostream& out, const geo::PointCloud& cloud);
void write_xyz(const std::filesystem::path& path, const geo::PointCloud& cloud);

/// OFF with triangle faces only ("3 i j k").
geo::TriangleMesh read_off(std::istream& in, const std::string& source = "<stream>");
geo::TriangleMesh read_off(const std::filesystem::path& path);

void write_off(std::ostream& out, const geo::TriangleMesh& mesh);
void write_off(const std::filesystem::path& path, const geo::TriangleMesh& mesh);

/// Formats a double with round-trip precision.
std::string format_double(double v);

} // namespace iterfilter::io
