#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace oransim {

// SplitMix64 finalizer. Used to derive independent stream seeds from one
// scenario seed; stable across platforms.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named random streams of one scenario. Each consumer draws from its own
// stream so that changing one mechanism's draw pattern leaves the others
// (arrivals, durations, deployment) untouched.
enum class Stream : std::uint64_t {
  deployment = 1,
  prices = 2,
  arrivals = 3,
  mining = 4,
  durations = 5,
};

// Thin wrapper over mt19937_64. The distribution transforms are written out
// by hand because the std:: distributions are not specified bit-for-bit and
// differ between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream stream)
      : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n). Lemire-style rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  // Strictly positive draw.
  double exponential(double mean) { return -mean * std::log(uniform_open()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace oransim
