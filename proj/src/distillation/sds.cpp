#include "scene4d/distillation/sds.hpp"

#include <algorithm>
#include <cmath>

#include "scene4d/core/error.hpp"
#include "scene4d/core/rng.hpp"

namespace scene4d {

int NoiseSchedule::level(double t) {
  const int l = static_cast<int>(std::floor(t * kLevels));
  return std::clamp(l, 1, kLevels - 1);
}

double NoiseSchedule::alpha_bar(double t) { return 1.0 - static_cast<double>(level(t)) / kLevels; }

void validate(const SdsConfig& c) {
  if (!(c.t_min > 0.0 && c.t_min <= c.t_max && c.t_max < 1.0)) throw ConfigError("noise range must satisfy 0 < t_min <= t_max < 1");
  if (!(c.p_single >= 0.0 && c.p_single <= 1.0)) throw ConfigError("p_single must lie in [0, 1]");
  for (double w : {c.omega_sd_static, c.omega_mv, c.omega_sd_dynamic, c.omega_video, c.weight_constant}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("SDS weights must be finite and non-negative");
  }
  if (c.frames < 3) throw ConfigError("at least 3 frames are needed");
  if (c.image_frames < 0 || c.image_frames > c.frames) throw ConfigError("image_frames must lie in [0, frames]");
  if (c.iterations < 0 || c.static_iterations < 0) throw ConfigError("iteration counts must be non-negative");
  if (!(c.learning_rate > 0.0) || !(c.static_learning_rate > 0.0)) throw ConfigError("learning rates must be positive");
  if (c.static_views < 1) throw ConfigError("static_views must be positive");
}

SdsSample sds_gradient(const Frames& x, Denoiser& denoiser, std::span<const double> embedding, RngStream& rng,
                       const SdsConfig& config) {
  for (double v : x.data) {
    if (!std::isfinite(v)) throw NumericError("render contains non-finite values");
  }
  SdsSample out;
  out.t = rng.uniform(config.t_min, config.t_max);
  out.alpha_bar = NoiseSchedule::alpha_bar(out.t);
  out.weight = config.weight(out.t);

  Frames eps(x.count, x.height, x.width);
  for (double& e : eps.data) e = rng.normal();
  const double a = std::sqrt(out.alpha_bar);
  const double b = std::sqrt(1.0 - out.alpha_bar);
  Frames xt(x.count, x.height, x.width);
  for (std::size_t i = 0; i < xt.data.size(); ++i) xt.data[i] = a * x.data[i] + b * eps.data[i];

  DenoiseRequest req;
  req.noisy = &xt;
  req.embedding = embedding;
  req.noise_level = out.t;
  req.alpha_bar = out.alpha_bar;
  req.injected_noise = &eps;
  Frames eps_hat = denoiser.predict(req);
  if (!eps_hat.same_shape(x) || eps_hat.data.size() != x.data.size()) {
    throw ContractError("denoiser output shape differs from its input");
  }

  out.grad = Frames(x.count, x.height, x.width);
  double sq = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double r = eps_hat.data[i] - eps.data[i];
    sq += r * r;
    out.grad.data[i] = out.weight * r;
  }
  out.residual = x.data.empty() ? 0.0 : sq / static_cast<double>(x.data.size());
  return out;
}

std::vector<double> combine_static_gradients(std::span<const double> g_image, std::span<const double> g_multiview,
                                             double omega_image, double omega_mv) {
  if (g_image.size() != g_multiview.size()) throw ContractError("gradient sizes differ");
  std::vector<double> out(g_image.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = omega_image * g_image[i] + omega_mv * g_multiview[i];
  return out;
}

RenderMode draw_render_mode(RngStream& rng, double p_single, std::size_t object_count) {
  if (object_count == 0) throw ContractError("cannot draw a render mode for an empty scene");
  if (rng.uniform() < p_single) return RenderMode::single(static_cast<int>(rng.below(object_count)));
  return RenderMode::joint();
}

Camera sample_camera(RngStream& rng, const CameraSampling& s, int width, int height) {
  const double az = rng.uniform(0.0, 360.0);
  const double el = rng.uniform(s.elevation_min_deg, s.elevation_max_deg);
  return Camera::orbit(az, el, s.radius, s.target, s.vertical_fov, width, height);
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw ContractError("parameter and gradient sizes differ");
  if (m_.empty()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  } else if (m_.size() != params.size()) {
    throw ContractError("parameter count changed between optimizer steps");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

}  // namespace scene4d
