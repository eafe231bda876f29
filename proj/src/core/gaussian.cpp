#include "scene4d/core/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "scene4d/core/error.hpp"

namespace scene4d {

void validate(const Gaussian3D& g) {
  if (!(g.scale.array() > 0.0).all() || !g.scale.allFinite()) {
    throw ContractError("Gaussian scale components must be positive and finite");
  }
  if (std::abs(g.rotation.norm() - 1.0) > 1e-6) {
    throw ContractError("Gaussian rotation must be a unit quaternion");
  }
  if (!g.center.allFinite()) throw ContractError("Gaussian center must be finite");
  if (!(g.opacity >= 0.0 && g.opacity <= 1.0)) throw ContractError("Gaussian opacity must lie in [0, 1]");
  if (!(g.color.array() >= 0.0).all() || !(g.color.array() <= 1.0).all()) {
    throw ContractError("Gaussian color must lie in [0, 1]");
  }
}

void sanitize(Gaussian3D& g) {
  g.opacity = std::clamp(g.opacity, 0.0, 1.0);
  g.color = g.color.cwiseMax(0.0).cwiseMin(1.0);
  g.rotation.normalize();
}

Mat3 covariance_of(const Gaussian3D& g) {
  const Mat3 r = g.rotation.toRotationMatrix();
  const Mat3 m = r * g.scale.asDiagonal();
  const Mat3 sigma = m * m.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

double query_gaussian(const Gaussian3D& g, const Vec3& x) {
  // Sigma^-1 = R S^-2 R^T, so the Mahalanobis term is |S^-1 R^T d|^2.
  const Vec3 local = g.rotation.toRotationMatrix().transpose() * (x - g.center);
  const double m = local.cwiseQuotient(g.scale).squaredNorm();
  return std::exp(-0.5 * m);
}

}  // namespace scene4d
