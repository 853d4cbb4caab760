#include "introspect/augment.hpp"

#include <algorithm>
#include <cmath>

#include "introspect/error.hpp"

namespace introspect {

Tensor affine_transform(const Tensor& image, float angle_rad, float zoom, float shift_x,
                        float shift_y) {
  if (image.rank() != 3) {
    raise(ErrorCode::kDimension, "augment: expected HxWxC image, got " + image.shape_str());
  }
  if (zoom <= 0.0f) raise(ErrorCode::kConfig, "augment: zoom must be positive");
  if (angle_rad == 0.0f && zoom == 1.0f && shift_x == 0.0f && shift_y == 0.0f) {
    return image;
  }
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
  const float cy = 0.5f * static_cast<float>(h - 1);
  const float cx = 0.5f * static_cast<float>(w - 1);
  const float cos_a = std::cos(angle_rad);
  const float sin_a = std::sin(angle_rad);
  const float inv_zoom = 1.0f / zoom;

  Tensor out({h, w, c});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse map: undo shift, then rotation and zoom about the center.
      const float dy = (static_cast<float>(y) - shift_y) - cy;
      const float dx = (static_cast<float>(x) - shift_x) - cx;
      const float src_y = cy + inv_zoom * (cos_a * dy + sin_a * dx);
      const float src_x = cx + inv_zoom * (-sin_a * dy + cos_a * dx);

      const int y0 = static_cast<int>(std::floor(src_y));
      const int x0 = static_cast<int>(std::floor(src_x));
      const float fy = src_y - static_cast<float>(y0);
      const float fx = src_x - static_cast<float>(x0);

      for (int ch = 0; ch < c; ++ch) {
        auto sample = [&](int yy, int xx) -> float {
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0.0f;
          return image.at((static_cast<std::size_t>(yy) * w + xx) * c + ch);
        };
        const float v = (1.0f - fy) * ((1.0f - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                        fy * ((1.0f - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
        out.at((static_cast<std::size_t>(y) * w + x) * c + ch) = std::clamp(v, 0.0f, 1.0f);
      }
    }
  }
  return out;
}

Tensor augment(const Tensor& image, SeededRng& rng, const AugmentConfig& config) {
  // Draw in a fixed order so the stream stays aligned across configs.
  const float angle = rng.uniform(-config.rotate_deg, config.rotate_deg) *
                      (3.14159265358979323846f / 180.0f);
  const float zoom = 1.0f + rng.uniform(-config.zoom_frac, config.zoom_frac);
  const float shift_x = rng.uniform(-config.shift_px, config.shift_px);
  const float shift_y = rng.uniform(-config.shift_px, config.shift_px);
  return affine_transform(image, angle, zoom, shift_x, shift_y);
}

}  // namespace introspect
