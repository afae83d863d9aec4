#pragma once

// Deterministic random streams.
//
// Seeds are derived with the splitmix64 finalizer so that every repetition,
// example and shard owns an independent stream identified by its index.
// Variate generation is implemented here rather than through <random>
// distributions, whose algorithms are left to the standard library vendor.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace spraycp {

/// splitmix64 output function applied to `x` (one step of the generator).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of sub-stream `stream` under `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// 64-bit FNV-1a.
constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Maps 64 random bits to a double strictly inside (0, 1). 52 bits are used so
/// that the largest value, 1 - 2^-53, is representable.
constexpr double open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// mt19937_64 engine plus hand-written variates (bit-reproducible per seed).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in (0, 1).
  double uniform() { return open_unit(engine_()); }

  /// Uniform integer in [0, n). Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via the Marsaglia polar method (no cached pair).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the u^(1/shape) boost.
  double gamma(double shape);

  /// Index drawn with probabilities `weights` (assumed to sum to 1).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace spraycp
