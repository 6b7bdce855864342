#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uhd/circuit.hpp"
#include "uhd/grid.hpp"
#include "uhd/kernels.hpp"

namespace uhd {

// Orthonormal low-pass basis on the within-period sample index: the constant
// column followed by sine/cosine pairs at harmonics 1..N of the repetition
// rate. Columns are exactly orthonormal whenever 2N+1 <= L.
struct TruncationBasis {
  int N = 0;
  SamplingGrid grid;
  Eigen::MatrixXd U;  // L x (2N+1)
  double f_c = 0;     // highest represented frequency N/T (Hz)
};

TruncationBasis fourier_basis(const SamplingGrid& grid, int N);

struct WeightVector {
  Eigen::VectorXd values;  // unit Euclidean norm
  std::string method;      // "optimal" | "constant" | "peak"
  int N = 0;               // harmonics kept (optimal only)
  double f_c = 0;          // frequency cutoff N/T (optimal only, Hz)
  double peak_width = 0;   // boxcar width in seconds (peak only)
  double achieved_snr = 0; // linear; NaN when no kernels were involved
};

// Maximizes (w^T S w)/(w^T E w) over the span of the N-harmonic basis via a
// generalized symmetric eigenproblem on the projected kernels. The projected
// noise matrix gets a relative ridge of 1e-10 before factorization; the
// reported SNR is recomputed from the unmodified kernels.
WeightVector optimize_weight(const KernelMatrix& shot, const KernelMatrix& electronic, int N);

// Uniform weight 1/sqrt(L) (the N=0 optimum candidate, and the conventional
// untailored readout).
WeightVector constant_weight(const SamplingGrid& grid);

// Unit-norm boxcar of round(width/dt) samples centered on the sampled
// response peak. Width below one sample step is rejected.
WeightVector peak_weight(const DerivedParams& dp, const SamplingGrid& grid, double width);

struct SweepPoint {
  int N = 0;
  double f_c = 0;  // Hz
  double snr = 0;  // linear
};

// optimize_weight for every N in [N_min, N_max].
std::vector<SweepPoint> snr_vs_cutoff(const KernelMatrix& shot, const KernelMatrix& electronic,
                                      int N_min, int N_max);

// Weighted response overlap with pulses d = -d_max..+d_max periods away:
// coeff[d + d_max] = sum_l w_l r(t_l + d*T - t_shift) * dt. Entries for
// future pulses (d < 0) vanish by causality; the d = 0 entry is the in-window
// signal amplitude. Used to quantify how much neighboring pulses leak into a
// weighted outcome.
Eigen::VectorXd crosstalk_coeffs(const DerivedParams& dp, const SamplingGrid& grid,
                                 const Eigen::VectorXd& w, int d_max);

}  // namespace uhd
