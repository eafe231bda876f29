#pragma once

#include "scene4d/core/math.hpp"

namespace scene4d {

// One splat. Color is diffuse RGB; there is no view-dependent term.
struct Gaussian3D {
  Vec3 center = Vec3::Zero();
  Vec3 scale = Vec3::Ones();
  Quat rotation = Quat::Identity();
  double opacity = 1.0;
  Vec3 color = Vec3::Zero();
};

// Throws ContractError when scale is non-positive or the quaternion is not unit.
void validate(const Gaussian3D& g);

// Clamps opacity and color into [0, 1] and renormalizes the rotation.
void sanitize(Gaussian3D& g);

// Sigma = R S S^T R^T.
Mat3 covariance_of(const Gaussian3D& g);

// exp(-1/2 (x - mu)^T Sigma^-1 (x - mu)).
double query_gaussian(const Gaussian3D& g, const Vec3& x);

}  // namespace scene4d
