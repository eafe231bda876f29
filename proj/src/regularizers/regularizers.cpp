#include "scene4d/regularizers/regularizers.hpp"

#include <cmath>

#include "scene4d/core/error.hpp"

namespace scene4d {

namespace {

Vec3 smoothed_norm_grad(const Vec3& v) {
  const double r = v.norm();
  if (r >= kNormSmoothing) return v / r;
  // f'(r) v / r with f(r) = 2 r^2 / eps - r^3 / eps^2.
  return (4.0 / kNormSmoothing - 3.0 * r / (kNormSmoothing * kNormSmoothing)) * v;
}

Vec3 mean_of(std::span<const Vec3> pts) {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : pts) sum += p;
  return sum / static_cast<double>(pts.size());
}

}  // namespace

void validate(const RegWeights& w) {
  if (!(w.omega1 >= 0.0 && w.omega2 >= 0.0 && w.contact >= 0.0)) {
    throw ContractError("regularization weights must be non-negative");
  }
}

double smoothed_norm(const Vec3& v) {
  const double r = v.norm();
  if (r >= kNormSmoothing) return r;
  // Cubic blend matching value and slope at r = eps, with zero slope at 0.
  return r * r * (2.0 * kNormSmoothing - r) / (kNormSmoothing * kNormSmoothing);
}

LossAndGrad rigidity_loss(std::span<const Vec3> deltas, const KnnCache& knn) {
  const std::size_t n = deltas.size();
  if (knn.k <= 0) throw ContractError("rigidity loss needs non-empty neighbor lists");
  if (knn.point_count() != n) throw ContractError("rigidity loss: deltas and kNN cache differ in length");
  LossAndGrad out;
  out.grad.assign(n, Vec3::Zero());
  const double w = 1.0 / (static_cast<double>(n) * knn.k);
  for (std::size_t x = 0; x < n; ++x) {
    for (int j : knn.neighbors(x)) {
      const Vec3 d = deltas[x] - deltas[static_cast<std::size_t>(j)];
      out.value += smoothed_norm(d);
      const Vec3 g = w * smoothed_norm_grad(d);
      out.grad[x] += g;
      out.grad[static_cast<std::size_t>(j)] -= g;
    }
  }
  out.value *= w;
  return out;
}

SequenceLossAndGrad acceleration_loss(std::span<const std::vector<Vec3>> frames) {
  if (frames.size() < 3) throw ContractError("acceleration loss needs at least three timesteps");
  const std::size_t n = frames.front().size();
  for (const auto& f : frames) {
    if (f.size() != n) throw ContractError("acceleration loss: frames differ in Gaussian count");
  }
  SequenceLossAndGrad out;
  out.grads.assign(frames.size(), std::vector<Vec3>(n, Vec3::Zero()));
  if (n == 0) return out;
  const double w = 1.0 / (static_cast<double>(n) * static_cast<double>(frames.size() - 2));
  for (std::size_t t = 0; t + 2 < frames.size(); ++t) {
    for (std::size_t x = 0; x < n; ++x) {
      const Vec3 second = frames[t][x] + frames[t + 2][x] - 2.0 * frames[t + 1][x];
      out.value += smoothed_norm(second);
      const Vec3 g = w * smoothed_norm_grad(second);
      out.grads[t][x] += g;
      out.grads[t + 2][x] += g;
      out.grads[t + 1][x] -= 2.0 * g;
    }
  }
  out.value *= w;
  return out;
}

DirectedContact directed_contact_loss(std::span<const Vec3> a, const Vec3& center, std::span<const Vec3> b) {
  DirectedContact out;
  out.grad_a.assign(a.size(), Vec3::Zero());
  out.grad_b.assign(b.size(), Vec3::Zero());
  if (a.empty() || b.empty()) throw ContractError("contact loss needs two non-empty objects");
  const KdTree tree(b);
  const double w = 1.0 / static_cast<double>(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    const std::size_t i = static_cast<std::size_t>(tree.nearest(a[j]));
    const Vec3 to_center = center - b[i];
    const Vec3 to_point = a[j] - b[i];
    const double theta = to_center.dot(to_point);
    if (theta < 0.0) {
      ++out.violations;
      out.value -= theta;
      // d(-theta)/d mu_j, d mu_i and d c.
      out.grad_a[j] -= w * to_center;
      out.grad_b[i] += w * (to_center + to_point);
      out.grad_center -= w * to_point;
    }
  }
  out.value *= w;
  return out;
}

ContactLoss contact_loss(std::span<const Vec3> a, std::span<const Vec3> b) {
  const DirectedContact ab = directed_contact_loss(a, mean_of(a), b);
  const DirectedContact ba = directed_contact_loss(b, mean_of(b), a);
  ContactLoss out;
  out.value = ab.value + ba.value;
  out.violations = ab.violations + ba.violations;
  out.grad_a = ab.grad_a;
  out.grad_b = ab.grad_b;
  const Vec3 share_a = ab.grad_center / static_cast<double>(a.size());
  const Vec3 share_b = ba.grad_center / static_cast<double>(b.size());
  for (std::size_t k = 0; k < a.size(); ++k) out.grad_a[k] += ba.grad_b[k] + share_a;
  for (std::size_t k = 0; k < b.size(); ++k) out.grad_b[k] += ba.grad_a[k] + share_b;
  return out;
}

bool in_collision(std::span<const Vec3> a, std::span<const Vec3> b) { return contact_loss(a, b).violations > 0; }

RegTotal total_regularization(std::span<const RegObjectInput> objects, const RegWeights& weights) {
  validate(weights);
  RegTotal out;
  const std::size_t n_obj = objects.size();
  if (n_obj == 0) return out;
  const std::size_t n_frames = objects.front().deltas.size();
  for (const auto& o : objects) {
    if (o.deltas.size() != n_frames || o.placed.size() != n_frames) {
      throw ContractError("regularization inputs must cover the same frames for every object");
    }
    if (o.knn == nullptr) throw ContractError("regularization input is missing its kNN cache");
  }
  if (n_frames == 0) throw ContractError("regularization needs at least one frame");

  out.grad_deltas.resize(n_obj);
  out.grad_placed.resize(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    const std::size_t n = objects[o].deltas.front().size();
    out.grad_deltas[o].assign(n_frames, std::vector<Vec3>(n, Vec3::Zero()));
    out.grad_placed[o].assign(n_frames, std::vector<Vec3>(n, Vec3::Zero()));
  }

  const double rig_w = 1.0 / static_cast<double>(n_obj * n_frames);
  const double acc_w = 1.0 / static_cast<double>(n_obj);
  const double con_w = 1.0 / static_cast<double>(n_frames);

  for (std::size_t o = 0; o < n_obj; ++o) {
    const auto& in = objects[o];
    for (std::size_t f = 0; f < n_frames; ++f) {
      const LossAndGrad r = rigidity_loss(in.deltas[f], *in.knn);
      out.rigidity += rig_w * r.value;
      auto& gd = out.grad_deltas[o][f];
      for (std::size_t x = 0; x < gd.size(); ++x) gd[x] += (weights.omega2 * rig_w) * r.grad[x];
    }
    const SequenceLossAndGrad acc = acceleration_loss(in.deltas);
    out.acceleration += acc_w * acc.value;
    for (std::size_t f = 0; f < n_frames; ++f) {
      auto& gd = out.grad_deltas[o][f];
      for (std::size_t x = 0; x < gd.size(); ++x) gd[x] += (weights.omega1 * acc_w) * acc.grads[f][x];
    }
  }

  for (std::size_t p = 0; p < n_obj; ++p) {
    for (std::size_t q = p + 1; q < n_obj; ++q) {
      for (std::size_t f = 0; f < n_frames; ++f) {
        const ContactLoss c = contact_loss(objects[p].placed[f], objects[q].placed[f]);
        if (c.violations == 0) continue;
        out.contact += con_w * c.value;
        auto& gp = out.grad_placed[p][f];
        auto& gq = out.grad_placed[q][f];
        for (std::size_t x = 0; x < gp.size(); ++x) gp[x] += (weights.contact * con_w) * c.grad_a[x];
        for (std::size_t x = 0; x < gq.size(); ++x) gq[x] += (weights.contact * con_w) * c.grad_b[x];
      }
    }
  }

  out.total = weights.combine(out.contact, out.acceleration, out.rigidity);
  return out;
}

}  // namespace scene4d
