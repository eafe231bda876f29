#include "scene4d/core/object.hpp"

#include <algorithm>
#include <cmath>

#include "scene4d/core/error.hpp"
#include "scene4d/core/ply.hpp"
#include "scene4d/core/rng.hpp"

namespace scene4d {

namespace {

constexpr double kInitialOpacity = 0.8;
constexpr int kScaleNeighbors = 3;
constexpr double kMinScale = 1e-6;

}  // namespace

std::vector<Vec3> GaussianObject::centers() const {
  std::vector<Vec3> out;
  out.reserve(gaussians.size());
  for (const auto& g : gaussians) out.push_back(g.center);
  return out;
}

Vec3 GaussianObject::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const auto& g : gaussians) sum += g.center;
  return gaussians.empty() ? sum : Vec3(sum / static_cast<double>(gaussians.size()));
}

void validate(const GaussianObject& obj) {
  for (const auto& g : obj.gaussians) validate(g);
  const std::size_t n = obj.gaussians.size();
  const auto& knn = obj.knn_cache;
  if (knn.indices.size() != n * static_cast<std::size_t>(knn.k)) {
    throw ContractError("kNN cache size does not match the Gaussian count");
  }
  for (std::size_t i = 0; i < n && knn.k > 0; ++i) {
    for (int j : knn.neighbors(i)) {
      if (j < 0 || static_cast<std::size_t>(j) >= n || static_cast<std::size_t>(j) == i) {
        throw ContractError("kNN cache holds an invalid or self-referential entry");
      }
    }
  }
  if (std::abs(obj.canonical_heading.norm() - 1.0) > 1e-9) throw ContractError("canonical heading must be unit");
  if (!(obj.object_scale > 0.0)) throw ContractError("object scale must be positive");
}

GaussianObject make_object(std::span<const ColoredPoint> points, int k, RngStream& rng, std::string entity_prompt) {
  if (points.empty()) throw ContractError("cannot build an object from an empty point cloud");
  std::vector<Vec3> positions;
  positions.reserve(points.size());
  for (const auto& p : points) positions.push_back(p.position);

  const KnnCache scale_knn = build_knn(positions, kScaleNeighbors);
  Vec3 lo = positions.front();
  Vec3 hi = positions.front();
  for (const auto& p : positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double fallback_scale = std::max(kMinScale, 0.01 * (hi - lo).norm());

  GaussianObject obj;
  obj.gaussians.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double mean = 0.0;
    for (int j : scale_knn.neighbors(i)) mean += (positions[j] - positions[i]).norm();
    double s = scale_knn.k > 0 ? 0.5 * mean / scale_knn.k : fallback_scale;
    s = std::max(s, kMinScale);

    Gaussian3D g;
    g.center = positions[i];
    g.scale = Vec3::Constant(s);
    g.opacity = kInitialOpacity;
    g.color = points[i].color.cwiseMax(0.0).cwiseMin(1.0);
    obj.gaussians.push_back(g);
  }
  obj.knn_cache = build_knn(positions, k);
  obj.deformation = DeformationNet::create_default(lo, hi, rng);
  obj.entity_prompt = std::move(entity_prompt);
  return obj;
}

GaussianObject load_object_from_pointcloud(const std::string& path, std::optional<std::size_t> point_count, int k,
                                           RngStream& rng, std::string entity_prompt) {
  std::vector<ColoredPoint> points = read_point_cloud(path);
  if (point_count) {
    if (*point_count == 0) throw CountError("requested point count must be positive");
    if (points.size() < *point_count) {
      throw CountError(path + ": holds " + std::to_string(points.size()) + " points, " +
                       std::to_string(*point_count) + " requested");
    }
    if (points.size() > *point_count) {
      std::vector<ColoredPoint> kept;
      kept.reserve(*point_count);
      for (std::size_t i = 0; i < *point_count; ++i) kept.push_back(points[i * points.size() / *point_count]);
      points = std::move(kept);
    }
  }
  return make_object(points, k, rng, std::move(entity_prompt));
}

void rebuild_knn(GaussianObject& obj, int k) { obj.knn_cache = build_knn(obj.centers(), k); }

}  // namespace scene4d
