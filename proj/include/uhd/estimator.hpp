#pragma once

#include <string>

#include <Eigen/Dense>

#include "uhd/kernels.hpp"
#include "uhd/synth.hpp"

namespace uhd {

// Subtracts, for each within-period sample index, the mean over all windows,
// so the returned trace has exactly zero per-index means. Requires >= 2
// windows.
TraceSet offset_correct(const TraceSet& trace);

// Sample second-moment matrix M_lm = (1/J) sum_j v_j[l] v_j[m] over the
// windows of an offset-corrected trace, tagged with the given role
// (Electronic for a dark trace, Shot for a vacuum-input trace). Windows
// flagged as edge transients are excluded. Fewer than 100 usable windows
// attaches a low-statistics warning.
KernelMatrix estimate_kernel(const TraceSet& trace, KernelRole role);

// Consecutive `block`-period segments for overlay plotting: column s holds
// windows s*block .. s*block+block-1 back to back. Pure reshaping.
struct PulseOverlay {
  Eigen::MatrixXd segments;  // (block*L) x (J/block)
  int block = 1;
  long dropped = 0;     // trailing windows that did not fill a segment
  std::string notice;   // non-empty when windows were dropped
};

PulseOverlay pulse_overlay(const TraceSet& trace, int block);

}  // namespace uhd
