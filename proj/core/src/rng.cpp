#include "introspect/rng.hpp"

#include <cmath>

#include "introspect/error.hpp"

namespace introspect {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t SeededRng::next_u64() {
  // xoshiro256++ (Blackman & Vigna).
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

float SeededRng::uniform() {
  return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
}

float SeededRng::uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

float SeededRng::normal(float mean, float stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  float u1 = 0.0f;
  do {
    u1 = uniform();
  } while (u1 <= 0.0f);
  const float u2 = uniform();
  const float radius = std::sqrt(-2.0f * std::log(u1));
  const float angle = 2.0f * 3.14159265358979323846f * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return mean + stddev * radius * std::cos(angle);
}

bool SeededRng::bernoulli(float p_true) { return uniform() < p_true; }

std::size_t SeededRng::index(std::size_t n) {
  if (n == 0) raise(ErrorCode::kContract, "SeededRng::index: n must be positive");
  if (n == 1) return 0;
  const std::uint64_t span = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return static_cast<std::size_t>(v % span);
}

SeededRng SeededRng::derive(std::string_view label) const {
  return SeededRng(hash_label(seed_, label));
}

std::uint64_t SeededRng::hash_label(std::uint64_t seed, std::string_view label) {
  // FNV-1a over the label folded into a splitmix64 finalizer.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::uint64_t x = seed ^ h;
  return splitmix64(x);
}

}  // namespace introspect
