#pragma once

#include <filesystem>
#include <vector>

#include "introspect/data.hpp"

namespace introspect {

/// Big-endian IDX pair (image magic 0x00000803, label magic 0x00000801).
/// Pixels scale to [0,1] by /255; counts of the two files must agree.
std::vector<LabeledExample> load_idx(const std::filesystem::path& images_path,
                                     const std::filesystem::path& labels_path);

/// Writes examples back out in the same format (u8 pixels = round(v*255)).
void write_idx(const std::vector<LabeledExample>& examples,
               const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path);

/// 3073-byte records: 1 label byte + 3072 channel-planar pixels (32x32 R,
/// then G, then B). File length must be a multiple of 3073.
std::vector<LabeledExample> load_cifar_binary(const std::filesystem::path& path);
void write_cifar_binary(const std::vector<LabeledExample>& examples,
                        const std::filesystem::path& path);

}  // namespace introspect
