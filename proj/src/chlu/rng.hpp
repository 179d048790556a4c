#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace chlu {

// Seeded random stream with hand-rolled output mapping so that results are
// bit-identical across standard libraries. std::mt19937_64 is specified by
// the standard; the distributions on top of it are not, so we do not use
// std::*_distribution anywhere.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Derives an independent stream from a root seed and a purpose label,
  // so subsystems (init, sampling, noise, ...) are reproducible in isolation.
  static Rng stream(std::uint64_t root_seed, std::string_view label) {
    // FNV-1a over the label, then mix in the seed with splitmix64 finalizer.
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : label) {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
    std::uint64_t x = h ^ (root_seed + 0x9e3779b97f4a7c15ull);
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27; x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return Rng(x);
  }

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (no cached spare; two draws per call).
  double normal() {
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::uint64_t index(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do { x = next(); } while (x >= limit);
    return x % n;
  }

private:
  std::mt19937_64 gen_;
};

} // namespace chlu
