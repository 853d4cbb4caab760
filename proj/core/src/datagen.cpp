#include "introspect/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "introspect/error.hpp"

namespace introspect {

std::vector<LabeledExample> gen_patch_errors(const std::vector<LabeledExample>& test_set,
                                             const BatchPredictor& predictor, int patch_size,
                                             SeededRng& rng) {
  if (patch_size < 1) raise(ErrorCode::kConfig, "patch errors: patch size must be >= 1");

  std::vector<LabeledExample> candidates;
  candidates.reserve(test_set.size());
  for (const LabeledExample& src : test_set) {
    if (!src.label) raise(ErrorCode::kContract, "patch errors: source example without label");
    const int h = src.image.dim(0), w = src.image.dim(1), c = src.image.dim(2);
    if (patch_size > h || patch_size > w) {
      raise(ErrorCode::kConfig, "patch errors: patch " + std::to_string(patch_size) +
                                    " larger than image " + src.image.shape_str());
    }
    const int top = static_cast<int>(rng.index(static_cast<std::size_t>(h - patch_size + 1)));
    const int left = static_cast<int>(rng.index(static_cast<std::size_t>(w - patch_size + 1)));
    Tensor patched = src.image;
    for (int y = top; y < top + patch_size; ++y) {
      for (int x = left; x < left + patch_size; ++x) {
        for (int ch = 0; ch < c; ++ch) {
          patched.at((static_cast<std::size_t>(y) * w + x) * c + ch) = 0.0f;
        }
      }
    }
    candidates.push_back(LabeledExample{std::move(patched), src.label, DatasetTag::kErrors});
  }

  std::vector<Tensor> images;
  images.reserve(candidates.size());
  for (const LabeledExample& e : candidates) images.push_back(e.image);
  const std::vector<int> preds = predictor(images);
  if (preds.size() != candidates.size()) {
    raise(ErrorCode::kContract, "patch errors: predictor returned wrong count");
  }

  std::vector<LabeledExample> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (preds[i] != *candidates[i].label) kept.push_back(std::move(candidates[i]));
  }
  return kept;
}

std::vector<LabeledExample> gen_noise(NoiseKind kind, int count, const std::vector<int>& shape,
                                      SeededRng& rng) {
  if (count < 1) raise(ErrorCode::kConfig, "noise: count must be >= 1");
  const DatasetTag tag =
      kind == NoiseKind::kGaussian ? DatasetTag::kGaussianNoise : DatasetTag::kUniformNoise;
  std::vector<LabeledExample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Tensor image(shape);
    if (kind == NoiseKind::kUniform) {
      for (std::size_t p = 0; p < image.size(); ++p) image.at(p) = rng.uniform();
    } else {
      for (std::size_t p = 0; p < image.size(); ++p) {
        image.at(p) = std::clamp(rng.normal(0.5f, 0.5f), 0.0f, 1.0f);
      }
    }
    out.push_back(LabeledExample{std::move(image), std::nullopt, tag});
  }
  return out;
}

Tensor adapt_image(const Tensor& image, const std::vector<int>& target_shape) {
  if (image.rank() != 3 || target_shape.size() != 3) {
    raise(ErrorCode::kConfig, "adapt: source and target must be HxWxC shapes");
  }
  const int sh = image.dim(0), sw = image.dim(1), sc = image.dim(2);
  const int th = target_shape[0], tw = target_shape[1], tc = target_shape[2];
  if ((sc != 1 && sc != 3) || (tc != 1 && tc != 3)) {
    raise(ErrorCode::kConfig, "adapt: unsupported channel pair " + std::to_string(sc) + "->" +
                                  std::to_string(tc) + " (only 1 and 3 supported)");
  }

  // Channel conversion first.
  Tensor chan({sh, sw, tc});
  for (int y = 0; y < sh; ++y) {
    for (int x = 0; x < sw; ++x) {
      const std::size_t src_base = (static_cast<std::size_t>(y) * sw + x) * sc;
      const std::size_t dst_base = (static_cast<std::size_t>(y) * sw + x) * tc;
      if (sc == tc) {
        for (int ch = 0; ch < tc; ++ch) chan.at(dst_base + ch) = image.at(src_base + ch);
      } else if (sc == 3) {  // luminance average
        const float lum =
            (image.at(src_base) + image.at(src_base + 1) + image.at(src_base + 2)) / 3.0f;
        chan.at(dst_base) = lum;
      } else {  // replicate gray
        for (int ch = 0; ch < 3; ++ch) chan.at(dst_base + ch) = image.at(src_base);
      }
    }
  }
  if (sh == th && sw == tw) return chan;

  // Bilinear resize with half-pixel centers.
  Tensor out({th, tw, tc});
  const float scale_y = static_cast<float>(sh) / static_cast<float>(th);
  const float scale_x = static_cast<float>(sw) / static_cast<float>(tw);
  for (int y = 0; y < th; ++y) {
    const float src_y = (static_cast<float>(y) + 0.5f) * scale_y - 0.5f;
    const int y0 = static_cast<int>(std::floor(src_y));
    const float fy = src_y - static_cast<float>(y0);
    for (int x = 0; x < tw; ++x) {
      const float src_x = (static_cast<float>(x) + 0.5f) * scale_x - 0.5f;
      const int x0 = static_cast<int>(std::floor(src_x));
      const float fx = src_x - static_cast<float>(x0);
      for (int ch = 0; ch < tc; ++ch) {
        auto sample = [&](int yy, int xx) -> float {
          yy = std::clamp(yy, 0, sh - 1);
          xx = std::clamp(xx, 0, sw - 1);
          return chan.at((static_cast<std::size_t>(yy) * sw + xx) * tc + ch);
        };
        const float v = (1.0f - fy) * ((1.0f - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                        fy * ((1.0f - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
        out.at((static_cast<std::size_t>(y) * tw + x) * tc + ch) = std::clamp(v, 0.0f, 1.0f);
      }
    }
  }
  return out;
}

std::vector<LabeledExample> adapt_cross_dataset(const std::vector<LabeledExample>& examples,
                                                const std::vector<int>& target_shape,
                                                DatasetTag tag) {
  if (!tag_is_unlabeled(tag)) {
    raise(ErrorCode::kConfig, "adapt: cross-dataset tag must be an unlabeled kind");
  }
  std::vector<LabeledExample> out;
  out.reserve(examples.size());
  for (const LabeledExample& e : examples) {
    out.push_back(LabeledExample{adapt_image(e.image, target_shape), std::nullopt, tag});
  }
  return out;
}

}  // namespace introspect
