#pragma once

#include <span>
#include <vector>

#include "scene4d/rasterizer/rasterizer.hpp"

namespace scene4d {

// A stack of RGB images, frame-major then row-major (F x H x W x 3).
struct Frames {
  int count = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Frames() = default;
  Frames(int f, int h, int w, double fill = 0.0)
      : count(f), height(h), width(w), data(static_cast<std::size_t>(f) * h * w * 3, fill) {}

  std::size_t frame_size() const { return static_cast<std::size_t>(height) * width * 3; }
  std::span<double> frame(int f) { return {data.data() + f * frame_size(), frame_size()}; }
  std::span<const double> frame(int f) const { return {data.data() + f * frame_size(), frame_size()}; }
  bool same_shape(const Frames& o) const { return count == o.count && height == o.height && width == o.width; }

  static Frames from_images(std::span<const RenderOutput> images);
  static Frames from_image(const RenderOutput& image) { return from_images({&image, 1}); }
};

}  // namespace scene4d
