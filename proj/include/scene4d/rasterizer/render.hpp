#pragma once

#include <span>
#include <utility>
#include <vector>

#include "scene4d/core/scene.hpp"
#include "scene4d/orientation/orientation.hpp"
#include "scene4d/rasterizer/rasterizer.hpp"

namespace scene4d {

// Joint renders every object along its trajectory; single renders one
// object alone in its own frame, i.e. at the world origin with no motion.
struct RenderMode {
  enum class Kind { joint, single };
  Kind kind = Kind::joint;
  int object_index = -1;

  static RenderMode joint() { return {}; }
  static RenderMode single(int index) { return {Kind::single, index}; }
  bool is_single() const { return kind == Kind::single; }
};

// Scene time tau in [0, 1] runs each trajectory over its own domain, so a
// truncated trajectory is traversed at tau * t_max.
Pose scene_pose(const Scene& scene, std::size_t object_index, double tau);
Pose object_centric_pose(const GaussianObject& obj);

struct PlacedObject {
  int object_index = -1;
  Pose pose;
  std::vector<Vec3> deltas;         // object space, from the deformation net
  std::vector<Vec3> world_centers;  // pose(x + delta)
};

// Objects active in `mode` at scene time tau. With deform = false the
// deformation net is skipped and deltas are zero.
std::vector<PlacedObject> place_scene(const Scene& scene, double tau, const RenderMode& mode, bool deform = true);

// Places with caller-supplied displacements (one vector per Gaussian).
PlacedObject place_with_deltas(const GaussianObject& obj, int object_index, const Pose& pose,
                               std::vector<Vec3> deltas);

struct SceneTrace {
  RenderOutput output;
  std::vector<Splat2D> splats;
  std::vector<std::pair<int, int>> origins;  // (slot in placed list, gaussian index)
  std::vector<Mat23> center_jacobians;
};

SceneTrace rasterize_placed(const Scene& scene, std::span<const PlacedObject> placed, const Camera& cam,
                            const RasterSettings& settings = {});
// Same, with objects[slot] the object behind placed[slot].
SceneTrace rasterize_placed(std::span<const GaussianObject* const> objects, std::span<const PlacedObject> placed,
                            const Camera& cam, const RasterSettings& settings = {});

// Throws IndexError for a bad single-mode index and DomainError for tau outside [0, 1].
RenderOutput render_scene(const Scene& scene, const Camera& cam, double tau, const RenderMode& mode,
                          const RasterSettings& settings = {});

struct ObjectGradients {
  std::vector<Vec3> world_center;
  std::vector<Vec3> color;
  std::vector<double> opacity;
};

// Per placed slot, gradients of <grad_image, image> + <grad_alpha, alpha>.
// Covariances are held fixed, so world-center gradients come only through
// the projected splat centers.
std::vector<ObjectGradients> scene_backward(std::span<const PlacedObject> placed,
                                            const SceneTrace& trace, const Camera& cam,
                                            const RasterSettings& settings, std::span<const double> grad_image,
                                            std::span<const double> grad_alpha = {});

}  // namespace scene4d
