#include "scene4d/orientation/orientation.hpp"

#include <algorithm>
#include <cmath>

#include "scene4d/core/error.hpp"

namespace scene4d {

namespace {

constexpr double kStationary = 1e-12;
constexpr double kParallel = 1e-12;
constexpr double kPoleTolerance = 1e-6;

}  // namespace

Vec3 heading_at(const Trajectory& traj, std::size_t i, std::span<const double> timesteps, const Vec3& canonical) {
  const std::size_t n = timesteps.size();
  if (i >= n) throw IndexError("heading sample index out of range");
  if (n < 2) return canonical.normalized();
  const std::size_t last_segment = std::min(i, n - 2);
  Vec3 heading = canonical.normalized();
  Vec3 prev = position_at(traj, timesteps[0]);
  for (std::size_t j = 0; j <= last_segment; ++j) {
    const Vec3 next = position_at(traj, timesteps[j + 1]);
    const Vec3 diff = next - prev;
    const double len = diff.norm();
    if (len > kStationary) heading = diff / len;
    prev = next;
  }
  return heading;
}

Mat3 rotation_between(const Vec3& a, const Vec3& b) {
  const Vec3 v = a.cross(b);
  const double s = v.norm();
  const double c = a.dot(b);
  if (s < kParallel) {
    if (c > 0.0) return Mat3::Identity();
    // Half turn about an axis orthogonal to a.
    Vec3 ref = std::abs(a.z()) > 1.0 - kPoleTolerance ? Vec3::UnitY() : Vec3::UnitZ();
    const Vec3 axis = (ref - ref.dot(a) * a).normalized();
    const Mat3 k = skew(axis);
    return Mat3::Identity() + 2.0 * k * k;
  }
  // Re-orthogonalize the axis against a; v/s loses direction when s is tiny.
  Vec3 axis = v / s;
  axis = (axis - axis.dot(a) * a).normalized();
  const double theta = std::atan2(s, c);
  const Mat3 k = skew(axis);
  return Mat3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * k * k;
}

std::size_t segment_index(std::span<const double> timesteps, double t) {
  if (timesteps.empty()) throw ContractError("segment lookup needs a non-empty time grid");
  auto it = std::upper_bound(timesteps.begin(), timesteps.end(), t);
  if (it == timesteps.begin()) return 0;
  return static_cast<std::size_t>(std::distance(timesteps.begin(), it) - 1);
}

Pose rest_pose(const GaussianObject& obj) {
  Pose pose;
  pose.scale = obj.object_scale;
  pose.pivot = obj.centroid();
  return pose;
}

Pose pose_at(const GaussianObject& obj, const Trajectory& traj, double t, std::span<const double> timesteps) {
  Pose pose = rest_pose(obj);
  const Vec3 heading = heading_at(traj, segment_index(timesteps, t), timesteps, obj.canonical_heading);
  pose.rotation = rotation_between(obj.canonical_heading.normalized(), heading);
  pose.translation = position_at(traj, t);
  return pose;
}

std::vector<Vec3> apply_pose(const Pose& pose, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(pose.apply(p));
  return out;
}

std::vector<Vec3> place_object(const GaussianObject& obj, const Trajectory& traj, double t,
                               std::span<const double> timesteps) {
  const auto centers = obj.centers();
  return apply_pose(pose_at(obj, traj, t, timesteps), centers);
}

}  // namespace scene4d
