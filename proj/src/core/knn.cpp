#include "scene4d/core/knn.hpp"

#include <algorithm>
#include <queue>
#include <thread>
#include <utility>

#include "scene4d/core/error.hpp"

namespace scene4d {

namespace {

using Candidate = std::pair<double, int>;  // (squared distance, index); lexicographic order

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  std::vector<int> order(points_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  nodes_.reserve(points_.size());
  root_ = build(order, 0, static_cast<int>(order.size()), 0);
}

int KdTree::build(std::vector<int>& order, int begin, int end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end, [&](int a, int b) {
    const double ca = points_[a][axis];
    const double cb = points_[b][axis];
    return ca < cb || (ca == cb && a < b);
  });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{order[mid], axis, -1, -1});
  const int left = build(order, begin, mid, depth + 1);
  const int right = build(order, mid + 1, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<int> KdTree::k_nearest(const Vec3& query, int k, int exclude) const {
  std::vector<int> result;
  if (k <= 0 || root_ < 0) return result;
  std::priority_queue<Candidate> heap;  // max-heap: worst candidate on top

  auto visit = [&](auto&& self, int node_id) -> void {
    if (node_id < 0) return;
    const Node& node = nodes_[node_id];
    const Vec3& p = points_[node.point];
    if (node.point != exclude) {
      const Candidate c{(p - query).squaredNorm(), node.point};
      if (static_cast<int>(heap.size()) < k) {
        heap.push(c);
      } else if (c < heap.top()) {
        heap.pop();
        heap.push(c);
      }
    }
    const double diff = query[node.axis] - p[node.axis];
    const int near_side = diff < 0.0 ? node.left : node.right;
    const int far_side = diff < 0.0 ? node.right : node.left;
    self(self, near_side);
    // Equal plane distance may still hide a lower-index tie, so only prune on strict excess.
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.top().first) self(self, far_side);
  };
  visit(visit, root_);

  result.resize(heap.size());
  for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
    result[i] = heap.top().second;
    heap.pop();
  }
  return result;
}

int KdTree::nearest(const Vec3& query) const {
  const auto r = k_nearest(query, 1);
  return r.empty() ? -1 : r.front();
}

KnnCache build_knn(std::span<const Vec3> points, int k, int threads) {
  if (k < 0) throw ContractError("neighbor count must be non-negative");
  const int n = static_cast<int>(points.size());
  KnnCache cache;
  cache.k = std::min(k, std::max(n - 1, 0));
  cache.indices.assign(static_cast<std::size_t>(n) * cache.k, -1);
  if (cache.k == 0) return cache;

  const KdTree tree(points);
  auto fill = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto nn = tree.k_nearest(points[i], cache.k, i);
      std::copy(nn.begin(), nn.end(), cache.indices.begin() + static_cast<std::ptrdiff_t>(i) * cache.k);
    }
  };
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    fill(0, n);
  } else {
    std::vector<std::jthread> workers;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(n, begin + chunk);
      if (begin < end) workers.emplace_back(fill, begin, end);
    }
  }
  return cache;
}

KnnCache build_knn_brute_force(std::span<const Vec3> points, int k) {
  const int n = static_cast<int>(points.size());
  KnnCache cache;
  cache.k = std::min(k, std::max(n - 1, 0));
  cache.indices.reserve(static_cast<std::size_t>(n) * cache.k);
  std::vector<Candidate> all;
  for (int i = 0; i < n; ++i) {
    all.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) all.emplace_back((points[j] - points[i]).squaredNorm(), j);
    }
    std::partial_sort(all.begin(), all.begin() + cache.k, all.end());
    for (int m = 0; m < cache.k; ++m) cache.indices.push_back(all[m].second);
  }
  return cache;
}

}  // namespace scene4d
