#pragma once

#include <Eigen/Dense>

#include "uhd/synth.hpp"

namespace uhd {

// Polyphase fractional-delay resampling: each period's samples are
// interpolated on a grid `up_factor` times finer with a Kaiser-windowed sinc
// bank and re-read with the per-period shift that undoes the clock drift.
struct ResampleConfig {
  int up_factor = 8;        // interpolation factor (125 -> 1000 samples)
  int filter_half_len = 16; // sinc taps per side, per phase
  double stopband_atten = 80.0;  // Kaiser design attenuation (dB)
  double cutoff = 0.45;     // assumed signal band, fraction of input Nyquist

  void validate() const;
};

// Kaiser-windowed sinc interpolation bank: row p holds the
// (2*filter_half_len + 1)-tap sub-filter for fractional advance p/up_factor
// of a sample step. Phase 0 is the exact identity; every row is normalized
// to unit DC gain.
Eigen::MatrixXd design_interp_filter(const ResampleConfig& cfg);

// Shifts period j of the trace by -j*drift_per_period so pulse arrivals
// coincide across windows. The trace edges are extended by reflection;
// periods whose reads cross into reflected or drift-exhausted territory are
// flagged via edge_invalid on the output. Drift walks larger than the trace
// itself are rejected.
TraceSet align(const TraceSet& trace, double drift_per_period, const ResampleConfig& cfg = {});

// Estimates the clock drift (seconds per period) by cross-correlating each
// window against the trace's leading pulse template, refining the
// correlation peak to sub-sample precision with a parabolic fit, and
// regressing peak position on window index (amplitude^2-weighted). Fails
// when no window shows a pulse standing above its correlation sidelobes.
double estimate_drift(const TraceSet& trace);

}  // namespace uhd
