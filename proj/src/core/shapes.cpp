#include "scene4d/core/shapes.hpp"

#include <cmath>

#include "scene4d/core/error.hpp"
#include "scene4d/core/rng.hpp"

namespace scene4d {

namespace {

// Up to +-15% brightness variation with height and azimuth.
Vec3 shade(const Vec3& base, const Vec3& unit_dir) {
  const double f = 1.0 + 0.15 * unit_dir.z() + 0.05 * unit_dir.x();
  return (base * f).cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

std::vector<ColoredPoint> sphere_points(std::size_t count, double radius, const Vec3& base_color) {
  // Fibonacci lattice.
  std::vector<ColoredPoint> out(count);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden_angle * static_cast<double>(i);
    const Vec3 dir(r * std::cos(a), r * std::sin(a), z);
    out[i] = {radius * dir, shade(base_color, dir)};
  }
  return out;
}

std::vector<ColoredPoint> box_points(std::size_t count, const Vec3& half_extent, const Vec3& base_color,
                                     RngStream& rng) {
  const Vec3 e = half_extent;
  const double areas[3] = {e.y() * e.z(), e.x() * e.z(), e.x() * e.y()};  // faces normal to x, y, z
  const double total = areas[0] + areas[1] + areas[2];
  std::vector<ColoredPoint> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    const int axis = pick < areas[0] ? 0 : (pick < areas[0] + areas[1] ? 1 : 2);
    const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = (a == axis) ? side * e[a] : rng.uniform(-e[a], e[a]);
    out[i] = {p, shade(base_color, p.normalized())};
  }
  return out;
}

std::vector<ColoredPoint> torus_points(std::size_t count, double major_radius, double minor_radius,
                                       const Vec3& base_color) {
  std::vector<ColoredPoint> out(count);
  const std::size_t rings = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(count * 3.0)));
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = 2.0 * kPi * (static_cast<double>(i) / static_cast<double>(count));
    const double v = 2.0 * kPi * std::fmod(static_cast<double>(i) * golden * static_cast<double>(rings) / 3.0, 1.0);
    const Vec3 p((major_radius + minor_radius * std::cos(v)) * std::cos(u),
                 (major_radius + minor_radius * std::cos(v)) * std::sin(u), minor_radius * std::sin(v));
    out[i] = {p, shade(base_color, p.normalized())};
  }
  return out;
}

std::vector<ColoredPoint> procedural_points(const std::string& shape, std::size_t count, double size,
                                            const Vec3& base_color, RngStream& rng) {
  if (count == 0) throw ContractError("procedural shape needs at least one point");
  if (!(size > 0.0)) throw ContractError("procedural shape size must be positive");
  if (shape == "sphere") return sphere_points(count, size, base_color);
  if (shape == "box") return box_points(count, Vec3::Constant(size), base_color, rng);
  if (shape == "torus") return torus_points(count, size, size / 3.0, base_color);
  throw ContractError("unknown procedural shape '" + shape + "'");
}

}  // namespace scene4d
