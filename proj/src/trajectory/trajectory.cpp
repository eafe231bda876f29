#include "scene4d/trajectory/trajectory.hpp"

#include <cmath>

#include "scene4d/core/error.hpp"

namespace scene4d {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kDomainSlack = 1e-12;

}  // namespace

std::string Trajectory::template_name() const {
  return std::visit(Overloaded{[](const BallisticMotion& m) -> std::string {
                                 return m.acceleration.isZero(0.0) ? "constant_velocity" : "projectile";
                               },
                               [](const CircularMotion&) -> std::string { return "circular"; }},
                    motion);
}

void validate(const Trajectory& traj) {
  if (!(traj.t_max > 0.0 && traj.t_max <= 1.0)) throw ContractError("trajectory t_max must lie in (0, 1]");
  const bool finite = std::visit(
      Overloaded{[](const BallisticMotion& m) {
                   return m.initial_position.allFinite() && m.initial_velocity.allFinite() &&
                          m.acceleration.allFinite();
                 },
                 [](const CircularMotion& m) {
                   return m.center.allFinite() && std::isfinite(m.radius) && std::isfinite(m.angular_velocity) &&
                          std::isfinite(m.phase);
                 }},
      traj.motion);
  if (!finite) throw ContractError("trajectory parameters must be finite");
}

Vec3 position_at(const Trajectory& traj, double t) {
  if (!(t >= -kDomainSlack && t <= traj.t_max + kDomainSlack)) {
    throw DomainError("time " + std::to_string(t) + " outside trajectory domain [0, " + std::to_string(traj.t_max) +
                      "]");
  }
  return std::visit(Overloaded{[t](const BallisticMotion& m) -> Vec3 {
                                 return m.initial_position + m.initial_velocity * t + 0.5 * m.acceleration * t * t;
                               },
                               [t](const CircularMotion& m) -> Vec3 {
                                 const double a = m.angular_velocity * t + m.phase;
                                 return m.center + m.radius * Vec3(std::cos(a), std::sin(a), 0.0);
                               }},
                    traj.motion);
}

Vec3 velocity_at(const Trajectory& traj, double t) {
  return std::visit(Overloaded{[t](const BallisticMotion& m) -> Vec3 { return m.initial_velocity + m.acceleration * t; },
                               [t](const CircularMotion& m) -> Vec3 {
                                 const double a = m.angular_velocity * t + m.phase;
                                 return m.radius * m.angular_velocity * Vec3(-std::sin(a), std::cos(a), 0.0);
                               }},
                    traj.motion);
}

std::vector<double> uniform_times(double t_max, int n_samples) {
  if (n_samples < 2) throw ContractError("uniform sampling needs at least two samples");
  std::vector<double> times(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) times[i] = t_max * static_cast<double>(i) / static_cast<double>(n_samples - 1);
  times.back() = t_max;
  return times;
}

std::vector<TimedPosition> sample_uniform(const Trajectory& traj, int n_samples) {
  std::vector<TimedPosition> out;
  for (double t : uniform_times(traj.t_max, n_samples)) out.push_back({t, position_at(traj, t)});
  return out;
}

}  // namespace scene4d
