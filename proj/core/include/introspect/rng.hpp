#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace introspect {

/// Deterministic 64-bit generator: xoshiro256++ seeded through splitmix64.
/// The full stream is a pure function of the seed, independent of platform
/// and standard-library version, so experiments replay bit-for-bit.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0,1) with 24 bits of mantissa.
  float uniform();
  float uniform(float lo, float hi);

  /// Box-Muller; consumes uniforms in a fixed order.
  float normal(float mean, float stddev);

  bool bernoulli(float p_true);

  /// Uniform index in [0,n); rejection-sampled, no modulo bias.
  std::size_t index(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = index(i + 1);
      std::swap(v[i], v[j]);
    }
  }

  /// Independent substream keyed by a label; derive("attack") and
  /// derive("split") never overlap regardless of draw order.
  SeededRng derive(std::string_view label) const;

  std::uint64_t seed() const { return seed_; }

  /// splitmix64-style mix of a seed with a label; also used for per-stage
  /// seeds in the pipeline.
  static std::uint64_t hash_label(std::uint64_t seed, std::string_view label);

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_ = 0;
  bool has_spare_ = false;
  float spare_ = 0.0f;
};

}  // namespace introspect
