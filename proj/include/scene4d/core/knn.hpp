#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scene4d/core/math.hpp"

namespace scene4d {

// Per-point neighbor lists, k entries each, stored row-major.
struct KnnCache {
  int k = 0;
  std::vector<int> indices;

  std::size_t point_count() const { return k == 0 ? 0 : indices.size() / static_cast<std::size_t>(k); }
  std::span<const int> neighbors(std::size_t i) const {
    return {indices.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
};

// Static k-d tree over a point set. Every query orders candidates by
// (squared distance, index), so duplicate points resolve to the lower index.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }

  // Index of the closest point; -1 for an empty tree.
  int nearest(const Vec3& query) const;

  // The k closest points sorted nearest first, skipping `exclude` (pass -1 to keep all).
  std::vector<int> k_nearest(const Vec3& query, int k, int exclude = -1) const;

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };
  int build(std::vector<int>& order, int begin, int end, int depth);

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Builds exact k-nearest-neighbor lists; k is clamped to point_count - 1.
// `threads` > 1 splits the query loop; output is identical to the sequential build.
KnnCache build_knn(std::span<const Vec3> points, int k, int threads = 1);

// Reference O(N^2) construction with the same ordering rule.
KnnCache build_knn_brute_force(std::span<const Vec3> points, int k);

}  // namespace scene4d
