#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scene4d/core/gaussian.hpp"
#include "scene4d/core/knn.hpp"
#include "scene4d/deformation/network.hpp"

namespace scene4d {

class RngStream;

inline constexpr int kDefaultNeighborCount = 60;

// One entity: a static Gaussian cloud plus its deformation field.
struct GaussianObject {
  std::vector<Gaussian3D> gaussians;
  DeformationNet deformation;
  KnnCache knn_cache;
  Vec3 canonical_heading = Vec3::UnitX();
  double object_scale = 1.0;
  std::string entity_prompt;

  std::vector<Vec3> centers() const;
  Vec3 centroid() const;
};

void validate(const GaussianObject& obj);

struct ColoredPoint {
  Vec3 position = Vec3::Zero();
  Vec3 color = Vec3::Zero();
};

// Builds Gaussians from points: isotropic scale of half the mean distance
// to the three nearest neighbors, the kNN cache, and a fresh deformation net.
GaussianObject make_object(std::span<const ColoredPoint> points, int k, RngStream& rng,
                           std::string entity_prompt = {});

// Reads a PLY point cloud. With point_count set, exactly that many points are
// kept by an even stride; a smaller cloud raises CountError.
GaussianObject load_object_from_pointcloud(const std::string& path, std::optional<std::size_t> point_count,
                                           int k, RngStream& rng, std::string entity_prompt = {});

// Recomputes the kNN cache from the current centers.
void rebuild_knn(GaussianObject& obj, int k);

}  // namespace scene4d
