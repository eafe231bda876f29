#include "scene4d/core/camera.hpp"

#include <cmath>

#include "scene4d/core/error.hpp"

namespace scene4d {

Mat3 Camera::world_to_camera_rotation() const {
  const Vec3 forward = (look_at - position).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 w;
  w.row(0) = right.transpose();
  w.row(1) = down.transpose();
  w.row(2) = forward.transpose();
  return w;
}

Vec3 Camera::to_camera(const Vec3& world) const { return world_to_camera_rotation() * (world - position); }

double Camera::focal_y() const { return 0.5 * image_height / std::tan(0.5 * vertical_fov); }

Camera Camera::orbit(double azimuth_deg, double elevation_deg, double radius, const Vec3& target,
                     double vertical_fov, int width, int height) {
  const double az = deg_to_rad(azimuth_deg);
  const double el = deg_to_rad(elevation_deg);
  Camera cam;
  cam.position = target + radius * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  cam.look_at = target;
  cam.up = Vec3::UnitZ();
  cam.vertical_fov = vertical_fov;
  cam.image_width = width;
  cam.image_height = height;
  cam.near = 0.01;
  cam.far = 10.0 * radius + 100.0;
  return cam;
}

void validate(const Camera& cam) {
  if (!(cam.near > 0.0) || !(cam.far > cam.near)) throw ContractError("camera requires 0 < near < far");
  if (!(cam.vertical_fov > 0.0 && cam.vertical_fov < kPi)) throw ContractError("camera fov must be in (0, pi)");
  if (cam.image_width <= 0 || cam.image_height <= 0) throw ContractError("camera resolution must be positive");
  const Vec3 forward = cam.look_at - cam.position;
  if (forward.norm() <= 0.0) throw ContractError("camera look_at coincides with position");
  if (forward.normalized().cross(cam.up.normalized()).norm() < 1e-9) {
    throw ContractError("camera view direction is parallel to up");
  }
}

}  // namespace scene4d
