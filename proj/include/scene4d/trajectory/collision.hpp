#pragma once

#include <optional>
#include <span>
#include <vector>

#include "scene4d/core/object.hpp"
#include "scene4d/trajectory/trajectory.hpp"

namespace scene4d {

struct CollisionCheckConfig {
  int n_samples = 64;
  // A truncated domain shorter than this fraction of the original asks for a re-query.
  double min_fraction = 0.3;
};

struct CollisionReport {
  bool collided = false;
  std::optional<double> first_collision_t;
  double original_t_max = 1.0;
  double truncated_t_max = 1.0;
  bool requery_recommended = false;
};

struct TruncationResult {
  Trajectory trajectory;
  CollisionReport report;
};

// Samples the trajectory uniformly, places and orients `moving` at every
// sample, and runs the contact-angle test against every placed object in
// `others`. On the first colliding sample the domain is cut back to the
// previous (collision-free) sample, and the shortened domain is sampled
// again until no sample collides. Throws UnrecoverablePlacementError when
// the pose at t = 0 already collides.
TruncationResult check_and_truncate(const Trajectory& traj, const GaussianObject& moving,
                                    std::span<const std::vector<Vec3>> others, const CollisionCheckConfig& config = {});

}  // namespace scene4d
