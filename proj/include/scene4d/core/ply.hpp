#pragma once

#include <map>
#include <string>
#include <vector>

#include "scene4d/core/object.hpp"

namespace scene4d {

enum class PlyFormat { ascii, binary_little_endian };

// Vertex table of a PLY file: every scalar vertex property, by name,
// converted to double. Colors stored as uchar are left in [0, 255].
struct PlyVertexTable {
  std::size_t count = 0;
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> columns;
  std::map<std::string, std::string> types;  // canonical scalar type name, e.g. "uint8"

  bool has(const std::string& name) const { return columns.count(name) != 0; }
  const std::vector<double>& column(const std::string& name) const;
};

// Parses ASCII or binary little-endian PLY. Non-vertex elements are skipped.
// Throws InputFormatError on any malformed input.
PlyVertexTable read_ply(const std::string& path);

// Positions (x, y, z) and colors (red, green, blue). Colors may be stored
// as uchar, or as float in [0, 1].
std::vector<ColoredPoint> read_point_cloud(const std::string& path);

// x, y, z float32 and red, green, blue uint8.
void write_point_cloud(const std::string& path, std::span<const ColoredPoint> points,
                       PlyFormat format = PlyFormat::binary_little_endian);

// Full Gaussian attributes: the point-cloud properties plus float64
// color_r/g/b, opacity, scale_0..2 and rot_0..3 (w, x, y, z).
void write_gaussians(const std::string& path, std::span<const Gaussian3D> gaussians);
std::vector<Gaussian3D> read_gaussians(const std::string& path);

}  // namespace scene4d
