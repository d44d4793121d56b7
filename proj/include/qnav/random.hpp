#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qnav {

// Deterministic generator seeded by a 64-bit value. All sampling in the
// library consumes a RandomStream passed explicitly; there is no global state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits; bit-identical across platforms.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller on two uniforms.
  double normal();

  // Independent child stream; the parent is not advanced.
  RandomStream derive(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t mix64(std::uint64_t x);

// Seed for trial `index` of an experiment: hash(master, tag, index).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

}  // namespace qnav
