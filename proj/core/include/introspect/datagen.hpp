#pragma once

#include <vector>

#include "introspect/data.hpp"
#include "introspect/rng.hpp"

namespace introspect {

/// One black patch per source image at a uniformly random valid position;
/// only images the predictor then misclassifies are kept (tag kErrors,
/// true label preserved).
std::vector<LabeledExample> gen_patch_errors(const std::vector<LabeledExample>& test_set,
                                             const BatchPredictor& predictor, int patch_size,
                                             SeededRng& rng);

enum class NoiseKind { kGaussian, kUniform };

/// Uniform: i.i.d. U[0,1]. Gaussian: i.i.d. N(0.5, 0.5^2) clipped to [0,1],
/// centered in the pixel range so brightness alone does not separate it.
/// Outputs carry no true label.
std::vector<LabeledExample> gen_noise(NoiseKind kind, int count, const std::vector<int>& shape,
                                      SeededRng& rng);

/// Converts foreign-dataset images to the classifier's input shape: channel
/// count by luminance average (3->1) or gray replication (1->3), spatial
/// size by bilinear resampling. Labels are dropped and the given tag
/// applied.
std::vector<LabeledExample> adapt_cross_dataset(const std::vector<LabeledExample>& examples,
                                                const std::vector<int>& target_shape,
                                                DatasetTag tag);

/// The shape conversion behind adapt_cross_dataset, for one image.
Tensor adapt_image(const Tensor& image, const std::vector<int>& target_shape);

}  // namespace introspect
