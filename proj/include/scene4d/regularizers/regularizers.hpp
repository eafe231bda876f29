#pragma once

#include <span>
#include <vector>

#include "scene4d/core/knn.hpp"
#include "scene4d/core/math.hpp"

namespace scene4d {

// Weights of the regularization total
//   L_reg = contact * L_contact + omega1 * L_acc + omega2 * L_rigidity.
struct RegWeights {
  double omega1 = 1e-4;  // acceleration
  double omega2 = 1e3;   // rigidity
  double contact = 1.0;

  double combine(double contact_loss, double acceleration_loss, double rigidity_loss) const {
    return contact * contact_loss + omega1 * acceleration_loss + omega2 * rigidity_loss;
  }
};

void validate(const RegWeights& w);

// Rigidity and acceleration penalize a smoothed norm: |v| itself once
// |v| >= eps, and the cubic 2 r^2 / eps - r^3 / eps^2 inside that ball.
// It is continuously differentiable, exactly zero at v = 0 and exact for
// every displacement that is not vanishingly small.
inline constexpr double kNormSmoothing = 1e-8;
double smoothed_norm(const Vec3& v);

struct LossAndGrad {
  double value = 0.0;
  std::vector<Vec3> grad;
};

// mean_x (1/k) sum_i |Delta_x - Delta_{NN_i(x)}|_eps.
LossAndGrad rigidity_loss(std::span<const Vec3> deltas, const KnnCache& knn);

// mean over Gaussians x and t of |Delta_{x,t} + Delta_{x,t+2} - 2 Delta_{x,t+1}|_eps.
// grads[t][x] matches the input layout.
struct SequenceLossAndGrad {
  double value = 0.0;
  std::vector<std::vector<Vec3>> grads;
};
SequenceLossAndGrad acceleration_loss(std::span<const std::vector<Vec3>> deltas_over_time);

// Contact-angle penalty of one object against another. For every Gaussian
// j of `a`, with mu_i the closest center of `b`,
//   theta_j = (center - mu_i) . (mu_j - mu_i)
// contributes -theta_j when theta_j < 0. The value is the mean over j.
// `grad_center` is d value / d center; grad_a and grad_b treat the center as fixed.
struct DirectedContact {
  double value = 0.0;
  std::vector<Vec3> grad_a;
  std::vector<Vec3> grad_b;
  Vec3 grad_center = Vec3::Zero();
  std::size_t violations = 0;
};
DirectedContact directed_contact_loss(std::span<const Vec3> a, const Vec3& center, std::span<const Vec3> b);

// Symmetric contact loss: directed(a, mean(a), b) + directed(b, mean(b), a),
// with gradients that include each center's dependence on its own points.
struct ContactLoss {
  double value = 0.0;
  std::vector<Vec3> grad_a;
  std::vector<Vec3> grad_b;
  std::size_t violations = 0;
};
ContactLoss contact_loss(std::span<const Vec3> a, std::span<const Vec3> b);

// True when any Gaussian of either object has an obtuse contact angle.
bool in_collision(std::span<const Vec3> a, std::span<const Vec3> b);

// Per-object inputs to the weighted total over a sequence of frames.
struct RegObjectInput {
  std::vector<std::vector<Vec3>> deltas;  // [frame][gaussian], object space
  std::vector<std::vector<Vec3>> placed;  // [frame][gaussian], world space
  const KnnCache* knn = nullptr;
};

struct RegTotal {
  double contact = 0.0;
  double acceleration = 0.0;
  double rigidity = 0.0;
  double total = 0.0;
  std::vector<std::vector<std::vector<Vec3>>> grad_deltas;  // [object][frame][gaussian]
  std::vector<std::vector<std::vector<Vec3>>> grad_placed;  // [object][frame][gaussian]
};

// Rigidity is averaged over objects and frames, acceleration over objects,
// and contact is summed over object pairs and averaged over frames.
RegTotal total_regularization(std::span<const RegObjectInput> objects, const RegWeights& weights);

}  // namespace scene4d
