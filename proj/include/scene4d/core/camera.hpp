#pragma once

#include "scene4d/core/math.hpp"

namespace scene4d {

// Pinhole camera. Camera space is x right, y down, z forward (depth).
struct Camera {
  Vec3 position = Vec3(0.0, -4.0, 0.0);
  Vec3 look_at = Vec3::Zero();
  Vec3 up = Vec3::UnitZ();
  double vertical_fov = 0.8;
  int image_width = 64;
  int image_height = 64;
  double near = 0.01;
  double far = 100.0;

  // Rows are the camera axes expressed in world coordinates.
  Mat3 world_to_camera_rotation() const;
  Vec3 to_camera(const Vec3& world) const;
  double focal_y() const;
  double focal_x() const { return focal_y(); }
  Vec2 principal_point() const { return {0.5 * image_width, 0.5 * image_height}; }

  // Camera on a sphere around `target`; azimuth measured from +x toward +y,
  // elevation from the xy-plane toward +z.
  static Camera orbit(double azimuth_deg, double elevation_deg, double radius,
                      const Vec3& target, double vertical_fov, int width, int height);
};

void validate(const Camera& cam);

}  // namespace scene4d
