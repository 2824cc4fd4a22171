#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace lipcert {

// Seeded random source with hand-rolled distributions. std::*_distribution
// output is implementation-defined, so the stream is derived from raw
// mt19937_64 draws only; identical seeds give identical samples on every
// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::vector<double> normal_vector(std::size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal();
    return v;
  }

  // Uniform direction on the unit sphere.
  std::vector<double> unit_vector(std::size_t dim) {
    for (;;) {
      std::vector<double> v = normal_vector(dim);
      double s = 0.0;
      for (double x : v) s += x * x;
      if (s > 0.0) {
        const double inv = 1.0 / std::sqrt(s);
        for (auto& x : v) x *= inv;
        return v;
      }
    }
  }

  // Uniform over the closed ball of the given radius (radius-rescaling:
  // uniform direction, radius R * U^(1/d)).
  std::vector<double> ball_point(std::size_t dim, double radius) {
    std::vector<double> v = unit_vector(dim);
    const double r =
        radius * std::pow(uniform01(), 1.0 / static_cast<double>(dim));
    for (auto& x : v) x *= r;
    return v;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream-splitting constant (splitmix64 increment) for restart seeds.
inline std::uint64_t reseed(std::uint64_t seed) {
  return seed ^ 0x9E3779B97F4A7C15ull;
}

}  // namespace lipcert
