#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "uhd/circuit.hpp"
#include "uhd/grid.hpp"

namespace uhd {

enum class KernelRole { Electronic, Shot, Response };

std::string role_name(KernelRole role);
KernelRole role_from_name(const std::string& name);

struct Provenance {
  enum class Kind { Model, Estimated } kind = Kind::Model;
  long n_windows = 0;           // windows averaged (Estimated only)
  bool low_statistics = false;  // set when n_windows < 100
};

// L x L second-moment matrix over one measurement window.
struct KernelMatrix {
  KernelRole role = KernelRole::Electronic;
  SamplingGrid grid;
  Eigen::MatrixXd values;  // symmetric, V^2
  Provenance provenance;
  std::string warning;  // non-empty when a soft precondition was violated
};

// Frequency-domain construction controls for the electronic kernel and for
// noise synthesis. The integration grid must resolve f0/100 and reach at
// least 50*f0; a raised-cosine taper rolls the integrand off at the top of
// the band so the truncation does not ring.
struct EBuildOptions {
  double f_max_over_f0 = 512.0;
  double df_over_f0 = 1.0 / 256.0;
  double taper_fraction = 0.05;
  bool convergence_check = true;

  void validate() const;
};

// Electronic-noise kernel E_lm from the circuit model: the cosine transform
// of S_e evaluated at the grid lags (Toeplitz). Throws NumericalError if
// halving the frequency step changes any entry by more than 0.1%.
KernelMatrix build_E(const DerivedParams& dp, const SamplingGrid& grid,
                     const EBuildOptions& opt = {});

// Same construction for an arbitrary nonnegative PSD (V^2/Hz); `f_scale`
// plays the role of f0 when sizing the frequency grid.
KernelMatrix build_E_from_psd(const std::function<double(double)>& psd, const SamplingGrid& grid,
                              double f_scale, const EBuildOptions& opt = {});

// Closed-form total electronic variance E(0) = pi * f0 * (n_c + n_f) / p.
double electronic_variance(const DerivedParams& dp);

// Impulse response sampled on the grid with the peak centered at T/2 and the
// post-period tail wrapped back into the window (the window sees the pulse
// train in steady state, so the response is effectively T-periodic).
// Unscaled (V/C).
Eigen::VectorXd sampled_response_shape(const DerivedParams& dp, const SamplingGrid& grid);

// Same, scaled to the per-pulse signal amplitude sqrt(eta_PD)*e*|alpha_p| so
// that the response kernel is the outer product of this vector (V).
Eigen::VectorXd sampled_response(const DerivedParams& dp, const SamplingGrid& grid,
                                 const LOConfig& lo, double eta_PD);

// Rank-one response kernel R = rho rho^T from the periodized sampled
// response. Attaches a warning when the impulse response retains more than 1%
// of its peak beyond one period (wrapped tail no longer negligible).
KernelMatrix build_R(const DerivedParams& dp, const SamplingGrid& grid, const LOConfig& lo,
                     double eta_PD);

// Multi-pulse response kernel summing plainly sampled (non-periodized)
// contributions of pulses k = -n_neighbors..+n_neighbors periods away.
// Future-pulse terms vanish by causality; when the response decays within one
// period this reduces to build_R.
KernelMatrix build_R_crosstalk(const DerivedParams& dp, const SamplingGrid& grid,
                               const LOConfig& lo, double eta_PD, int n_neighbors);

// Elementwise sum/difference with role algebra E + R -> S and S - E -> R.
KernelMatrix add(const KernelMatrix& electronic, const KernelMatrix& response);
KernelMatrix subtract(const KernelMatrix& shot, const KernelMatrix& electronic);

struct EigDecomposition {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns, orthonormal; largest-|entry| positive
};

EigDecomposition eig_decompose(const KernelMatrix& k);

// SNR = (w^T S w) / (w^T E w), linear.
double snr_of_weight(const Eigen::VectorXd& w, const KernelMatrix& shot,
                     const KernelMatrix& electronic);

// eta_e = 1 - 1/snr for snr >= 1.
double efficiency_from_snr(double snr);

inline double db_from_linear(double x) { return 10.0 * std::log10(x); }
inline double linear_from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace uhd
