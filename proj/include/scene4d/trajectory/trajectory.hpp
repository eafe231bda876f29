#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scene4d/core/math.hpp"

namespace scene4d {

// p(t) = p0 + v t + 1/2 a t^2. Covers the constant-velocity (a = 0) and
// projectile templates.
struct BallisticMotion {
  Vec3 initial_position = Vec3::Zero();
  Vec3 initial_velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

// p(t) = center + radius * (cos(w t + phase), sin(w t + phase), 0).
struct CircularMotion {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double angular_velocity = 0.0;
  double phase = 0.0;
};

// A kinematic template instance over normalized time [0, t_max].
struct Trajectory {
  std::variant<BallisticMotion, CircularMotion> motion = BallisticMotion{};
  double t_max = 1.0;

  static Trajectory identity() { return {}; }
  static Trajectory ballistic(const Vec3& p0, const Vec3& v, const Vec3& a, double t_max = 1.0) {
    return {BallisticMotion{p0, v, a}, t_max};
  }
  static Trajectory circular(const Vec3& center, double radius, double angular_velocity, double phase,
                             double t_max = 1.0) {
    return {CircularMotion{center, radius, angular_velocity, phase}, t_max};
  }

  // "constant_velocity", "projectile" or "circular".
  std::string template_name() const;
};

struct TimedPosition {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

// Throws ContractError for t_max outside (0, 1] or non-finite parameters.
void validate(const Trajectory& traj);

// Closed-form position; throws DomainError when t is outside [0, t_max].
Vec3 position_at(const Trajectory& traj, double t);

// Analytic derivative dp/dt.
Vec3 velocity_at(const Trajectory& traj, double t);

// n_samples equally spaced times over [0, t_max], both ends included.
std::vector<double> uniform_times(double t_max, int n_samples);
std::vector<TimedPosition> sample_uniform(const Trajectory& traj, int n_samples);

}  // namespace scene4d
