#pragma once

#include "introspect/rng.hpp"
#include "introspect/tensor.hpp"

namespace introspect {

/// Ranges for the three train-time perturbations; a transform is sampled
/// uniformly from [-range, +range] (zoom from [1-range, 1+range]).
struct AugmentConfig {
  float rotate_deg = 0.0f;
  float zoom_frac = 0.0f;
  float shift_px = 0.0f;

  bool enabled() const { return rotate_deg != 0.0f || zoom_frac != 0.0f || shift_px != 0.0f; }
};

/// Rotation/zoom/shift about the image center with bilinear resampling and
/// zero fill. All-zero ranges reproduce the input exactly; pixel range stays
/// in [0,1].
Tensor augment(const Tensor& image, SeededRng& rng, const AugmentConfig& config);

/// The deterministic transform behind augment(); angle in radians, shifts in
/// pixels (content moves by +shift).
Tensor affine_transform(const Tensor& image, float angle_rad, float zoom, float shift_x,
                        float shift_y);

}  // namespace introspect
