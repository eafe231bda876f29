#pragma once

#include <string>

#include "scene4d/rasterizer/rasterizer.hpp"

namespace scene4d {

// 8-bit PNG, RGB or RGBA. Values are clamped to [0, 1] and rounded.
void write_png(const std::string& path, const RenderOutput& img, bool with_alpha = false);

// Reads an 8-bit RGB or RGBA PNG; alpha is 1 when the file has none.
RenderOutput read_png(const std::string& path);

}  // namespace scene4d
