#pragma once

#include <cstdint>

namespace lipcert {

// Numerical knobs shared across the library. Defaults target double
// precision at desk-scale dimensions (d <= 1000).
struct Tolerances {
  double psd = 1e-10;        // pivot threshold, relative to 1 + max |diagonal|
  double factor = 1e-9;      // reconstruction bound, relative to 1 + max |entry|
  double spectral = 1e-10;   // Rayleigh-quotient convergence, relative
  int max_iter = 10000;      // power-iteration cap (per start vector)
  double zero_distance = 1e-12;  // gradient singularity, relative to 1 + |x1| + |x2|
  double violation = 1e-9;       // multiplicative slack on k when counting violations
  std::uint64_t spectral_seed = 42;  // power-iteration start vector
};

}  // namespace lipcert
