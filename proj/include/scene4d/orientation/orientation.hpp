#pragma once

#include <span>
#include <vector>

#include "scene4d/core/object.hpp"
#include "scene4d/trajectory/trajectory.hpp"

namespace scene4d {

// Similarity transform used to put an object into the world:
// x -> pivot + rotation * (scale * (x - pivot)) + translation.
// The pivot is the object's static centroid, so the translation is where
// the centroid ends up relative to its rest position.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  double scale = 1.0;
  Vec3 pivot = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return pivot + rotation * (scale * (x - pivot)) + translation; }
  // d apply / d x.
  Mat3 linear() const { return scale * rotation; }
};

// Direction of travel over sample segment i: normalize(F(t_{i+1}) - F(t_i)).
// The final sample reuses the previous heading; a stationary segment falls
// back to the previous heading, or to `canonical` when none exists.
Vec3 heading_at(const Trajectory& traj, std::size_t i, std::span<const double> timesteps,
                const Vec3& canonical = Vec3::UnitX());

// Rodrigues rotation taking unit vector a onto unit vector b. For
// antipodal inputs the axis is the part of +z orthogonal to a (or of +y
// when a is within 1e-6 of +-z).
Mat3 rotation_between(const Vec3& a, const Vec3& b);

// Index of the sample segment containing t: the largest i with timesteps[i] <= t.
std::size_t segment_index(std::span<const double> timesteps, double t);

// Pose of `obj` at trajectory time t, facing along the heading of the
// segment containing t.
Pose pose_at(const GaussianObject& obj, const Trajectory& traj, double t, std::span<const double> timesteps);

// Pose with only the object scale applied (object-centric placement).
Pose rest_pose(const GaussianObject& obj);

std::vector<Vec3> apply_pose(const Pose& pose, std::span<const Vec3> points);

// World-space centers of `obj` at trajectory time t.
std::vector<Vec3> place_object(const GaussianObject& obj, const Trajectory& traj, double t,
                               std::span<const double> timesteps);

}  // namespace scene4d
