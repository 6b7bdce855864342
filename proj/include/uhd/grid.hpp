#pragma once

#include <cmath>

#include "uhd/errors.hpp"

namespace uhd {

// Uniform within-period sampling grid: L samples per repetition period T,
// sample l at t_l = (l/L)*T relative to the window start.
struct SamplingGrid {
  int L = 0;     // samples per period, >= 2
  double T = 0;  // repetition period (s)

  double sample_rate() const { return L / T; }
  double dt() const { return T / L; }
  double time(int l) const { return (static_cast<double>(l) / L) * T; }

  void validate() const {
    if (L < 2) throw ValidationError("samples per period must be >= 2", "grid.L");
    if (!(T > 0) || !std::isfinite(T)) throw ValidationError("period must be positive", "grid.T");
  }

  bool same_as(const SamplingGrid& o) const {
    return L == o.L && std::abs(T - o.T) <= 1e-12 * T;
  }
};

}  // namespace uhd
