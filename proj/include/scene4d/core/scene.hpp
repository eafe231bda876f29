#pragma once

#include <string>
#include <vector>

#include "scene4d/core/object.hpp"
#include "scene4d/trajectory/trajectory.hpp"

namespace scene4d {

inline constexpr int kDefaultFrameCount = 16;

struct Scene {
  std::vector<GaussianObject> objects;
  std::vector<Trajectory> trajectories;
  std::string scene_prompt;
  std::vector<double> time_grid = uniform_times(1.0, kDefaultFrameCount);
};

// F uniformly spaced times: 0, 1/(F-1), ..., 1.
std::vector<double> make_time_grid(int frames);

void validate(const Scene& scene);

}  // namespace scene4d
