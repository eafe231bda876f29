#include "scene4d/trajectory/collision.hpp"

#include <optional>
#include <utility>

#include "scene4d/core/error.hpp"
#include "scene4d/orientation/orientation.hpp"
#include "scene4d/regularizers/regularizers.hpp"

namespace scene4d {

TruncationResult check_and_truncate(const Trajectory& traj, const GaussianObject& moving,
                                    std::span<const std::vector<Vec3>> others, const CollisionCheckConfig& config) {
  validate(traj);
  if (config.n_samples < 2) throw ContractError("collision check needs at least two samples");
  if (!(config.min_fraction >= 0.0 && config.min_fraction <= 1.0)) {
    throw ContractError("min_fraction must lie in [0, 1]");
  }

  TruncationResult result{traj, {}};
  result.report.original_t_max = traj.t_max;
  result.report.truncated_t_max = traj.t_max;

  const std::vector<Vec3> centers = moving.centers();
  // Index of the first colliding sample over [0, t_max], if any.
  auto first_hit = [&](double t_max) -> std::optional<std::pair<std::size_t, std::vector<double>>> {
    std::vector<double> times = uniform_times(t_max, config.n_samples);
    for (std::size_t s = 0; s < times.size(); ++s) {
      const std::vector<Vec3> placed = apply_pose(pose_at(moving, traj, times[s], times), centers);
      for (const auto& other : others) {
        if (!other.empty() && in_collision(placed, other)) return std::make_pair(s, std::move(times));
      }
    }
    return std::nullopt;
  };

  // Resampling the shortened domain puts samples at new times, so cut again
  // until a pass is clean. Each pass shrinks t_max by at least 1/(n-1).
  constexpr int kMaxPasses = 256;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const auto hit = first_hit(result.trajectory.t_max);
    if (!hit) break;
    const auto& [s, times] = *hit;
    if (s == 0) throw UnrecoverablePlacementError("moving object collides at t = 0");
    if (!result.report.collided) result.report.first_collision_t = times[s];
    result.report.collided = true;
    result.report.truncated_t_max = times[s - 1];
    result.trajectory.t_max = times[s - 1];
    if (pass + 1 == kMaxPasses) throw UnrecoverablePlacementError("trajectory truncation did not settle");
  }
  result.report.requery_recommended =
      result.report.truncated_t_max < config.min_fraction * result.report.original_t_max;
  return result;
}

}  // namespace scene4d
