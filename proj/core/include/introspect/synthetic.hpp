#pragma once

#include <cstdint>
#include <vector>

#include "introspect/data.hpp"

namespace introspect {

/// Procedural 28x28x1 digit glyphs (classes 0-9, balanced) with per-sample
/// rotation, scale, shift, stroke-width and noise jitter. A stand-in for
/// handwritten-digit data when no real files are on hand; classes are
/// learnable but not trivially linearly separable.
std::vector<LabeledExample> synth_digits(int count, std::uint64_t seed);

/// 32x32x3 colored sinusoid textures (labels are arbitrary texture buckets);
/// plays the role of a foreign natural-image dataset.
std::vector<LabeledExample> synth_textures(int count, std::uint64_t seed);

/// 28x28x1 filled silhouettes with noise; a foreign grayscale dataset.
std::vector<LabeledExample> synth_garments(int count, std::uint64_t seed);

}  // namespace introspect
