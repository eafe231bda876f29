#include "scene4d/rasterizer/rasterizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "scene4d/core/error.hpp"

namespace scene4d {

namespace {

// Screen-space data shared by the forward and reverse passes.
struct Prepared {
  int index = -1;  // into the caller's splat array
  Vec2 center;
  double conic_xx = 0.0, conic_xy = 0.0, conic_yy = 0.0;
  double opacity = 0.0;
  Vec3 color;
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bounds
};

// Invisible splats (opacity below the skip threshold, degenerate covariance,
// or no pixel in reach) are dropped; everything else is kept in depth order.
std::vector<Prepared> prepare(std::span<const Splat2D> splats, int width, int height) {
  std::vector<Prepared> out;
  out.reserve(splats.size());
  for (int idx : depth_order(splats)) {
    const Splat2D& s = splats[static_cast<std::size_t>(idx)];
    if (!(s.opacity >= kMinContribution)) continue;
    const Mat2& c = s.cov2d;
    const double det = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
    if (!(det > 0.0) || !(c(0, 0) > 0.0)) continue;
    Prepared p;
    p.index = idx;
    p.center = s.pixel_center;
    p.conic_xx = c(1, 1) / det;
    p.conic_xy = -0.5 * (c(0, 1) + c(1, 0)) / det;
    p.conic_yy = c(0, 0) / det;
    p.opacity = s.opacity;
    p.color = s.color;
    // Outside this radius alpha * G < 1/256 < 1/255, so the pixel would be skipped anyway.
    const double mid = 0.5 * (c(0, 0) + c(1, 1));
    const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    const double radius = std::sqrt(2.0 * std::log(256.0 * s.opacity) * lambda_max);
    p.x0 = std::max(0, static_cast<int>(std::ceil(p.center.x() - radius - 0.5)));
    p.x1 = std::min(width - 1, static_cast<int>(std::floor(p.center.x() + radius - 0.5)));
    p.y0 = std::max(0, static_cast<int>(std::ceil(p.center.y() - radius - 0.5)));
    p.y1 = std::min(height - 1, static_cast<int>(std::floor(p.center.y() + radius - 0.5)));
    if (p.x0 > p.x1 || p.y0 > p.y1) continue;
    out.push_back(p);
  }
  return out;
}

inline double gaussian_weight(const Prepared& p, double px, double py, double& dx, double& dy) {
  dx = px - p.center.x();
  dy = py - p.center.y();
  const double power = -0.5 * (p.conic_xx * dx * dx + 2.0 * p.conic_xy * dx * dy + p.conic_yy * dy * dy);
  return std::exp(power);
}

// Front-to-back blend of one pixel over `ids` (indices into `prep`).
template <typename Ids>
void blend_pixel(const std::vector<Prepared>& prep, const Ids& ids, int x, int y, const Vec3& background,
                 RenderOutput& out) {
  const double px = x + 0.5;
  const double py = y + 0.5;
  double t = 1.0;
  Vec3 c = Vec3::Zero();
  for (int id : ids) {
    const Prepared& p = prep[static_cast<std::size_t>(id)];
    double dx, dy;
    const double sigma = p.opacity * gaussian_weight(p, px, py, dx, dy);
    if (sigma < kMinContribution) continue;
    c += p.color * (sigma * t);
    t *= 1.0 - sigma;
    if (t < kMinTransmittance) break;
  }
  c += background * t;
  const std::size_t pix = static_cast<std::size_t>(y) * out.width + x;
  out.image[pix * 3] = c.x();
  out.image[pix * 3 + 1] = c.y();
  out.image[pix * 3 + 2] = c.z();
  out.alpha[pix] = 1.0 - t;
}

struct TileGrid {
  int tile = 16;
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<int>> lists;  // per tile, ids into the prepared array in depth order
};

TileGrid bin_tiles(const std::vector<Prepared>& prep, int width, int height, int tile) {
  if (tile <= 0) throw ContractError("tile size must be positive");
  TileGrid grid;
  grid.tile = tile;
  grid.tiles_x = (width + tile - 1) / tile;
  grid.tiles_y = (height + tile - 1) / tile;
  grid.lists.resize(static_cast<std::size_t>(grid.tiles_x) * grid.tiles_y);
  for (std::size_t id = 0; id < prep.size(); ++id) {
    const Prepared& p = prep[id];
    for (int ty = p.y0 / tile; ty <= p.y1 / tile; ++ty) {
      for (int tx = p.x0 / tile; tx <= p.x1 / tile; ++tx) {
        grid.lists[static_cast<std::size_t>(ty) * grid.tiles_x + tx].push_back(static_cast<int>(id));
      }
    }
  }
  return grid;
}

void validate_grad_shape(const RenderOutput& ref, std::span<const double> grad_image,
                         std::span<const double> grad_alpha) {
  if (grad_image.size() != ref.image.size()) throw ContractError("image gradient has the wrong shape");
  if (!grad_alpha.empty() && grad_alpha.size() != ref.alpha.size()) {
    throw ContractError("alpha gradient has the wrong shape");
  }
}

}  // namespace

std::optional<Projection> project(const Vec3& center, const Mat3& covariance, double opacity, const Vec3& color,
                                  const Camera& cam) {
  const Mat3 w = cam.world_to_camera_rotation();
  const Vec3 pc = w * (center - cam.position);
  const double z = pc.z();
  if (!(z > cam.near) || !(z < cam.far)) return std::nullopt;

  const double fx = cam.focal_x();
  const double fy = cam.focal_y();
  const Vec2 principal = cam.principal_point();
  const Vec2 uv(fx * pc.x() / z + principal.x(), fy * pc.y() / z + principal.y());
  if (std::abs(uv.x() - principal.x()) > kScreenMargin * 0.5 * cam.image_width ||
      std::abs(uv.y() - principal.y()) > kScreenMargin * 0.5 * cam.image_height) {
    return std::nullopt;
  }

  Mat23 j;
  j << fx / z, 0.0, -fx * pc.x() / (z * z),
       0.0, fy / z, -fy * pc.y() / (z * z);
  const Mat23 jw = j * w;
  Mat2 cov2d = jw * covariance * jw.transpose();
  cov2d = 0.5 * (cov2d + cov2d.transpose()).eval();
  cov2d.diagonal().array() += kLowPassVariance;

  Projection out;
  out.splat = Splat2D{uv, cov2d, z, opacity, color};
  out.center_jacobian = jw;
  return out;
}

std::optional<Splat2D> project(const Gaussian3D& g, const Camera& cam) {
  auto p = project(g.center, covariance_of(g), g.opacity, g.color, cam);
  if (!p) return std::nullopt;
  return p->splat;
}

std::vector<int> depth_order(std::span<const Splat2D> splats) {
  std::vector<int> order(splats.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = splats[static_cast<std::size_t>(a)].depth;
    const double db = splats[static_cast<std::size_t>(b)].depth;
    return da < db || (da == db && a < b);
  });
  return order;
}

RenderOutput composite(std::span<const Splat2D> splats, const Camera& cam, const RasterSettings& settings) {
  RenderOutput out(cam.image_width, cam.image_height);
  const std::vector<Prepared> prep = prepare(splats, out.width, out.height);
  const TileGrid grid = bin_tiles(prep, out.width, out.height, settings.tile_size);

  auto render_tile = [&](int tile_id) {
    const int tx = tile_id % grid.tiles_x;
    const int ty = tile_id / grid.tiles_x;
    const auto& ids = grid.lists[static_cast<std::size_t>(tile_id)];
    const int x_end = std::min(out.width, (tx + 1) * grid.tile);
    const int y_end = std::min(out.height, (ty + 1) * grid.tile);
    for (int y = ty * grid.tile; y < y_end; ++y) {
      for (int x = tx * grid.tile; x < x_end; ++x) blend_pixel(prep, ids, x, y, settings.background, out);
    }
  };

  const int n_tiles = grid.tiles_x * grid.tiles_y;
  const int threads = std::clamp(settings.threads, 1, std::max(1, n_tiles));
  if (threads == 1) {
    for (int i = 0; i < n_tiles; ++i) render_tile(i);
  } else {
    // Tiles write disjoint pixels, so the schedule cannot change the result.
    std::atomic<int> next{0};
    std::vector<std::jthread> workers;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (int i = next++; i < n_tiles; i = next++) render_tile(i);
      });
    }
  }
  return out;
}

RenderOutput composite_reference(std::span<const Splat2D> splats, const Camera& cam, const RasterSettings& settings) {
  RenderOutput out(cam.image_width, cam.image_height);
  const std::vector<Prepared> prep = prepare(splats, out.width, out.height);
  std::vector<int> all(prep.size());
  std::iota(all.begin(), all.end(), 0);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) blend_pixel(prep, all, x, y, settings.background, out);
  }
  return out;
}

SplatGradients composite_backward(std::span<const Splat2D> splats, const Camera& cam, const RasterSettings& settings,
                                  std::span<const double> grad_image, std::span<const double> grad_alpha) {
  const RenderOutput shape(cam.image_width, cam.image_height);
  validate_grad_shape(shape, grad_image, grad_alpha);
  SplatGradients grads;
  grads.center.assign(splats.size(), Vec2::Zero());
  grads.opacity.assign(splats.size(), 0.0);
  grads.color.assign(splats.size(), Vec3::Zero());

  const std::vector<Prepared> prep = prepare(splats, shape.width, shape.height);
  const TileGrid grid = bin_tiles(prep, shape.width, shape.height, settings.tile_size);

  struct Hit {
    int id;
    double sigma;
    double transmittance;  // before this splat
    double dx, dy;
  };
  std::vector<Hit> hits;

  for (int ty = 0; ty < grid.tiles_y; ++ty) {
    for (int tx = 0; tx < grid.tiles_x; ++tx) {
      const auto& ids = grid.lists[static_cast<std::size_t>(ty) * grid.tiles_x + tx];
      if (ids.empty()) continue;
      const int x_end = std::min(shape.width, (tx + 1) * grid.tile);
      const int y_end = std::min(shape.height, (ty + 1) * grid.tile);
      for (int y = ty * grid.tile; y < y_end; ++y) {
        for (int x = tx * grid.tile; x < x_end; ++x) {
          const std::size_t pix = static_cast<std::size_t>(y) * shape.width + x;
          const Vec3 g_c(grad_image[pix * 3], grad_image[pix * 3 + 1], grad_image[pix * 3 + 2]);
          const double g_a = grad_alpha.empty() ? 0.0 : grad_alpha[pix];
          if (g_c.isZero(0.0) && g_a == 0.0) continue;

          // Replay the forward pass for this pixel.
          hits.clear();
          double t = 1.0;
          for (int id : ids) {
            const Prepared& p = prep[static_cast<std::size_t>(id)];
            double dx, dy;
            const double sigma = p.opacity * gaussian_weight(p, x + 0.5, y + 0.5, dx, dy);
            if (sigma < kMinContribution) continue;
            hits.push_back({id, sigma, t, dx, dy});
            t *= 1.0 - sigma;
            if (t < kMinTransmittance) break;
          }

          // behind: color seen from just behind splat i with unit transmittance;
          // pass: product of (1 - sigma) over splats behind i.
          Vec3 behind = settings.background;
          double pass = 1.0;
          for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
            const Prepared& p = prep[static_cast<std::size_t>(it->id)];
            const std::size_t src = static_cast<std::size_t>(p.index);
            grads.color[src] += (it->sigma * it->transmittance) * g_c;
            const double d_sigma =
                it->transmittance * (g_c.dot(p.color - behind) + g_a * pass);
            const double g = it->sigma / p.opacity;  // G'(r)
            grads.opacity[src] += d_sigma * g;
            // d sigma / d center = sigma * Q (r - center).
            const Vec2 q_d(p.conic_xx * it->dx + p.conic_xy * it->dy, p.conic_xy * it->dx + p.conic_yy * it->dy);
            grads.center[src] += (d_sigma * it->sigma) * q_d;
            behind = p.color * it->sigma + (1.0 - it->sigma) * behind;
            pass *= 1.0 - it->sigma;
          }
        }
      }
    }
  }
  return grads;
}

}  // namespace scene4d
