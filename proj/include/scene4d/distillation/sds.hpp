#pragma once

#include <functional>
#include <span>
#include <vector>

#include "scene4d/core/camera.hpp"
#include "scene4d/distillation/denoiser.hpp"
#include "scene4d/rasterizer/render.hpp"

namespace scene4d {

class RngStream;

// Linear alpha-bar schedule over 1000 discrete levels:
// level = clamp(floor(1000 t), 1, 999), alpha_bar = 1 - level / 1000.
struct NoiseSchedule {
  static constexpr int kLevels = 1000;
  static int level(double t);
  static double alpha_bar(double t);
};

struct SdsConfig {
  double t_min = 0.02;
  double t_max = 0.98;
  double weight_constant = 1.0;
  // Overrides the constant weighting when set. Not serialized.
  std::function<double(double)> weighting;

  double omega_sd_static = 1.0;  // image SDS, static stage
  double omega_mv = 1.0;         // multiview SDS, static stage
  double omega_sd_dynamic = 1.0; // image SDS, dynamic stage
  double omega_video = 1.0;      // video SDS, dynamic stage

  double p_single = 0.2;
  int frames = 16;
  int image_frames = 4;
  int iterations = 3000;
  double learning_rate = 1e-4;

  int static_iterations = 0;
  double static_learning_rate = 1e-2;
  int static_views = 4;
  bool static_train_centers = true;

  double weight(double t) const { return weighting ? weighting(t) : weight_constant; }
  double p_joint() const { return 1.0 - p_single; }
};

// Throws ConfigError on out-of-range values.
void validate(const SdsConfig& c);

struct SdsSample {
  Frames grad;  // w(t) (eps_hat - eps), shaped like the render
  double t = 0.0;
  double alpha_bar = 0.0;
  double weight = 0.0;
  double residual = 0.0;  // mean squared (eps_hat - eps)
};

// Samples t and eps, noises x and queries the denoiser. Throws NumericError
// for a non-finite render.
SdsSample sds_gradient(const Frames& x, Denoiser& denoiser, std::span<const double> embedding, RngStream& rng,
                       const SdsConfig& config);

// omega_image * g_image + omega_mv * g_multiview.
std::vector<double> combine_static_gradients(std::span<const double> g_image, std::span<const double> g_multiview,
                                             double omega_image, double omega_mv);

// Single with probability p_single (object drawn uniformly), joint otherwise.
RenderMode draw_render_mode(RngStream& rng, double p_single, std::size_t object_count);

struct CameraSampling {
  double radius = 4.0;
  double elevation_min_deg = -10.0;
  double elevation_max_deg = 45.0;
  double vertical_fov = 0.8;
  Vec3 target = Vec3::Zero();
};

// Azimuth uniform in [0, 360), elevation uniform in the configured range.
Camera sample_camera(RngStream& rng, const CameraSampling& sampling, int width, int height);

class Adam {
 public:
  explicit Adam(double learning_rate = 1e-4, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  // params -= lr * m_hat / (sqrt(v_hat) + eps). Moment buffers are sized on first use.
  void step(std::span<double> params, std::span<const double> grad);

  double learning_rate() const { return lr_; }
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace scene4d
