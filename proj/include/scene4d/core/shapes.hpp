#pragma once

#include <string>
#include <vector>

#include "scene4d/core/object.hpp"

namespace scene4d {

class RngStream;

// Procedural point clouds used in place of a learned static stage.
// Points lie on the surface; colors carry a mild position-dependent shading
// around `base_color` so renders are not flat.
std::vector<ColoredPoint> sphere_points(std::size_t count, double radius, const Vec3& base_color);
std::vector<ColoredPoint> box_points(std::size_t count, const Vec3& half_extent, const Vec3& base_color,
                                     RngStream& rng);
std::vector<ColoredPoint> torus_points(std::size_t count, double major_radius, double minor_radius,
                                       const Vec3& base_color);

// Dispatches on "sphere", "box" or "torus"; `size` is the radius, the box
// half-extent, or the torus major radius (minor = size / 3).
std::vector<ColoredPoint> procedural_points(const std::string& shape, std::size_t count, double size,
                                            const Vec3& base_color, RngStream& rng);

}  // namespace scene4d
