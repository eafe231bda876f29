#include "scene4d/core/scene.hpp"

#include "scene4d/core/error.hpp"

namespace scene4d {

std::vector<double> make_time_grid(int frames) { return uniform_times(1.0, frames); }

void validate(const Scene& scene) {
  if (scene.trajectories.size() != scene.objects.size()) {
    throw ContractError("scene needs exactly one trajectory per object");
  }
  const auto& grid = scene.time_grid;
  if (grid.size() < 2 || grid.front() != 0.0 || grid.back() != 1.0) {
    throw ContractError("time grid must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ContractError("time grid must be strictly increasing");
  }
  for (const auto& obj : scene.objects) validate(obj);
  for (const auto& traj : scene.trajectories) validate(traj);
}

}  // namespace scene4d
