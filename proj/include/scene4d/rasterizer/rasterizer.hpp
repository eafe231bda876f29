#pragma once

#include <optional>
#include <span>
#include <vector>

#include "scene4d/core/camera.hpp"
#include "scene4d/core/gaussian.hpp"

namespace scene4d {

// Screen-space Gaussian. Pixel (u, v) covers [u, u+1) x [v, v+1) and is
// sampled at its center (u + 0.5, v + 0.5).
struct Splat2D {
  Vec2 pixel_center = Vec2::Zero();
  Mat2 cov2d = Mat2::Identity();
  double depth = 1.0;
  double opacity = 1.0;
  Vec3 color = Vec3::Zero();
};

struct RenderOutput {
  int width = 0;
  int height = 0;
  std::vector<double> image;  // height * width * 3, row-major RGB
  std::vector<double> alpha;  // height * width

  RenderOutput() = default;
  RenderOutput(int w, int h) : width(w), height(h), image(static_cast<std::size_t>(w) * h * 3, 0.0),
                               alpha(static_cast<std::size_t>(w) * h, 0.0) {}

  Vec3 pixel(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {image[i], image[i + 1], image[i + 2]};
  }
  double alpha_at(int x, int y) const { return alpha[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr double kLowPassVariance = 0.3;        // px^2 added to the 2D covariance diagonal
inline constexpr double kMinContribution = 1.0 / 255.0; // smaller sigma_i are skipped
inline constexpr double kMinTransmittance = 1e-4;      // a pixel stops once T drops below this
inline constexpr double kScreenMargin = 1.3;           // centers beyond 1.3x the half-screen are culled

struct RasterSettings {
  int tile_size = 16;
  Vec3 background = Vec3::Zero();
  int threads = 1;
};

struct Projection {
  Splat2D splat;
  Mat23 center_jacobian;  // d pixel_center / d world center (covariance held fixed)
};

// Perspective projection with the EWA covariance J W Sigma W^T J^T plus the
// low-pass term. Returns nullopt for culled Gaussians.
std::optional<Projection> project(const Vec3& center, const Mat3& covariance, double opacity, const Vec3& color,
                                  const Camera& cam);
std::optional<Splat2D> project(const Gaussian3D& g, const Camera& cam);

// Front-to-back order: ascending depth, ties by input index.
std::vector<int> depth_order(std::span<const Splat2D> splats);

// Tile-binned alpha compositing.
RenderOutput composite(std::span<const Splat2D> splats, const Camera& cam, const RasterSettings& settings = {});

// Per-pixel compositing over the full sorted list; the tiled path must match it bit for bit.
RenderOutput composite_reference(std::span<const Splat2D> splats, const Camera& cam,
                                 const RasterSettings& settings = {});

struct SplatGradients {
  std::vector<Vec2> center;
  std::vector<double> opacity;
  std::vector<Vec3> color;
};

// Reverse pass of composite() through the fixed depth order. grad_image has
// the layout of RenderOutput::image; grad_alpha may be empty.
SplatGradients composite_backward(std::span<const Splat2D> splats, const Camera& cam, const RasterSettings& settings,
                                  std::span<const double> grad_image, std::span<const double> grad_alpha = {});

}  // namespace scene4d
