#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "scene4d/core/math.hpp"
#include "scene4d/core/rng.hpp"

namespace scene4d::testing {

inline Vec3 random_unit(RngStream& rng) {
  for (;;) {
    Vec3 v(rng.normal(), rng.normal(), rng.normal());
    if (v.norm() > 1e-6) return v.normalized();
  }
}

inline std::vector<Vec3> random_points(RngStream& rng, std::size_t n, double extent = 1.0) {
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent));
  return pts;
}

// Central difference of f() with respect to x, restoring x afterwards.
template <typename F>
double central_difference(F&& f, double& x, double h = 1e-4) {
  const double x0 = x;
  x = x0 + h;
  const double fp = f();
  x = x0 - h;
  const double fm = f();
  x = x0;
  return (fp - fm) / (2.0 * h);
}

// |a - b| <= rel * max(|a|, |b|) + abs_floor. The floor absorbs the
// O(eps / h) round-off of a central difference on near-zero entries.
inline bool rel_close(double a, double b, double rel = 1e-4, double abs_floor = 1e-9) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("scene4d_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace scene4d::testing
