#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "introspect/model.hpp"

namespace introspect {

/// Container layout (all integers little-endian):
///   magic "INTR" | version u32 | records... | crc32 u32
/// record: name_len u32 | name bytes | rank u32 | dims u32[rank] | f32 data
/// The CRC covers every byte before it. Round trips are bit-identical.
void save_weights(const Weights& weights, const std::filesystem::path& path);
Weights load_weights(const std::filesystem::path& path);

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

std::uint32_t crc32(std::span<const unsigned char> bytes);

}  // namespace introspect
