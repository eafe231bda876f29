#include "scene4d/rasterizer/render.hpp"

#include <algorithm>

#include "scene4d/core/error.hpp"

namespace scene4d {

Pose scene_pose(const Scene& scene, std::size_t object_index, double tau) {
  const GaussianObject& obj = scene.objects.at(object_index);
  const Trajectory& traj = scene.trajectories.at(object_index);
  std::vector<double> grid(scene.time_grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = scene.time_grid[i] * traj.t_max;
  return pose_at(obj, traj, std::min(tau * traj.t_max, traj.t_max), grid);
}

Pose object_centric_pose(const GaussianObject& obj) { return rest_pose(obj); }

PlacedObject place_with_deltas(const GaussianObject& obj, int object_index, const Pose& pose,
                               std::vector<Vec3> deltas) {
  if (deltas.size() != obj.gaussians.size()) throw ContractError("one displacement per Gaussian is required");
  PlacedObject out;
  out.object_index = object_index;
  out.pose = pose;
  out.world_centers.reserve(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    out.world_centers.push_back(pose.apply(obj.gaussians[i].center + deltas[i]));
  }
  out.deltas = std::move(deltas);
  return out;
}

std::vector<PlacedObject> place_scene(const Scene& scene, double tau, const RenderMode& mode, bool deform) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("scene time must lie in [0, 1]");
  if (scene.trajectories.size() != scene.objects.size()) throw ContractError("one trajectory per object");
  auto deltas_for = [&](const GaussianObject& obj) {
    if (!deform) return std::vector<Vec3>(obj.gaussians.size(), Vec3::Zero());
    const auto centers = obj.centers();
    return obj.deformation.deform(centers, tau);
  };

  std::vector<PlacedObject> placed;
  if (mode.is_single()) {
    if (mode.object_index < 0 || static_cast<std::size_t>(mode.object_index) >= scene.objects.size()) {
      throw IndexError("render object index out of range");
    }
    const GaussianObject& obj = scene.objects[static_cast<std::size_t>(mode.object_index)];
    placed.push_back(place_with_deltas(obj, mode.object_index, object_centric_pose(obj), deltas_for(obj)));
    return placed;
  }
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const GaussianObject& obj = scene.objects[i];
    placed.push_back(place_with_deltas(obj, static_cast<int>(i), scene_pose(scene, i, tau), deltas_for(obj)));
  }
  return placed;
}

SceneTrace rasterize_placed(const Scene& scene, std::span<const PlacedObject> placed, const Camera& cam,
                            const RasterSettings& settings) {
  std::vector<const GaussianObject*> objects;
  for (const auto& p : placed) objects.push_back(&scene.objects.at(static_cast<std::size_t>(p.object_index)));
  return rasterize_placed(objects, placed, cam, settings);
}

SceneTrace rasterize_placed(std::span<const GaussianObject* const> objects, std::span<const PlacedObject> placed,
                            const Camera& cam, const RasterSettings& settings) {
  if (objects.size() != placed.size()) throw ContractError("one object per placed slot");
  SceneTrace trace;
  for (std::size_t slot = 0; slot < placed.size(); ++slot) {
    const PlacedObject& p = placed[slot];
    const GaussianObject& obj = *objects[slot];
    const Mat3 lin = p.pose.linear();
    for (std::size_t g = 0; g < obj.gaussians.size(); ++g) {
      const Gaussian3D& gauss = obj.gaussians[g];
      const Mat3 cov = lin * covariance_of(gauss) * lin.transpose();
      auto proj = project(p.world_centers[g], cov, gauss.opacity, gauss.color, cam);
      if (!proj) continue;
      trace.splats.push_back(proj->splat);
      trace.origins.emplace_back(static_cast<int>(slot), static_cast<int>(g));
      trace.center_jacobians.push_back(proj->center_jacobian);
    }
  }
  trace.output = composite(trace.splats, cam, settings);
  return trace;
}

RenderOutput render_scene(const Scene& scene, const Camera& cam, double tau, const RenderMode& mode,
                          const RasterSettings& settings) {
  const auto placed = place_scene(scene, tau, mode);
  return rasterize_placed(scene, placed, cam, settings).output;
}

std::vector<ObjectGradients> scene_backward(std::span<const PlacedObject> placed,
                                            const SceneTrace& trace, const Camera& cam,
                                            const RasterSettings& settings, std::span<const double> grad_image,
                                            std::span<const double> grad_alpha) {
  std::vector<ObjectGradients> out(placed.size());
  for (std::size_t slot = 0; slot < placed.size(); ++slot) {
    const std::size_t n = placed[slot].world_centers.size();
    out[slot].world_center.assign(n, Vec3::Zero());
    out[slot].color.assign(n, Vec3::Zero());
    out[slot].opacity.assign(n, 0.0);
  }
  const SplatGradients sg = composite_backward(trace.splats, cam, settings, grad_image, grad_alpha);
  for (std::size_t s = 0; s < trace.splats.size(); ++s) {
    const auto [slot, g] = trace.origins[s];
    ObjectGradients& og = out[static_cast<std::size_t>(slot)];
    og.world_center[static_cast<std::size_t>(g)] += trace.center_jacobians[s].transpose() * sg.center[s];
    og.color[static_cast<std::size_t>(g)] += sg.color[s];
    og.opacity[static_cast<std::size_t>(g)] += sg.opacity[s];
  }
  return out;
}

}  // namespace scene4d
