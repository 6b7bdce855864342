#include "uhd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "uhd/constants.hpp"
#include "uhd/errors.hpp"
#include "uhd/threading.hpp"

namespace uhd {

std::string role_name(KernelRole role) {
  switch (role) {
    case KernelRole::Electronic: return "electronic";
    case KernelRole::Shot: return "shot";
    case KernelRole::Response: return "response";
  }
  return "unknown";
}

KernelRole role_from_name(const std::string& name) {
  if (name == "electronic") return KernelRole::Electronic;
  if (name == "shot") return KernelRole::Shot;
  if (name == "response") return KernelRole::Response;
  throw ValidationError("unknown kernel role '" + name + "' (expected electronic|shot|response)",
                        "kernel.role");
}

void EBuildOptions::validate() const {
  if (!(f_max_over_f0 >= 50.0)) {
    throw ValidationError("frequency span must reach at least 50*f0", "e_build.f_max_over_f0");
  }
  if (!(df_over_f0 > 0) || df_over_f0 > 0.01) {
    throw ValidationError("frequency step must resolve f0/100", "e_build.df_over_f0");
  }
  if (!(taper_fraction >= 0 && taper_fraction <= 0.5)) {
    throw ValidationError("taper fraction must be in [0, 0.5]", "e_build.taper_fraction");
  }
}

namespace {

// Lags 0..L-1 of the covariance 2*Int_0^F psd(f)*taper(f)*cos(2*pi*f*tau) df
// by midpoint rule with step df.
Eigen::VectorXd covariance_lags(const std::function<double(double)>& psd,
                                const SamplingGrid& grid, double f_max, double df,
                                double taper_fraction) {
  const auto n_bins = static_cast<std::int64_t>(std::llround(f_max / df));
  Eigen::ArrayXd weighted(n_bins);
  for (std::int64_t k = 0; k < n_bins; ++k) {
    const double f = (static_cast<double>(k) + 0.5) * df;
    const double s = psd(f);
    if (!std::isfinite(s) || s < 0) {
      std::ostringstream msg;
      msg << "power spectral density is negative or non-finite at f=" << f;
      throw ValidationError(msg.str(), "e_build.psd");
    }
    double taper = 1.0;
    const double u = f / f_max;
    if (taper_fraction > 0 && u > 1.0 - taper_fraction) {
      taper = 0.5 * (1.0 + std::cos(constants::pi * (u - (1.0 - taper_fraction)) / taper_fraction));
    }
    weighted[k] = 2.0 * s * taper * df;
  }

  Eigen::ArrayXd freqs(n_bins);
  for (std::int64_t k = 0; k < n_bins; ++k) freqs[k] = (static_cast<double>(k) + 0.5) * df;

  Eigen::VectorXd lags(grid.L);
  parallel_chunks(grid.L, 8, [&](std::int64_t begin, std::int64_t end, std::size_t) {
    for (std::int64_t l = begin; l < end; ++l) {
      const double tau = static_cast<double>(l) * grid.dt();
      lags[l] = (weighted * (2.0 * constants::pi * tau * freqs).cos()).sum();
    }
  });
  return lags;
}

Eigen::MatrixXd toeplitz_from_lags(const Eigen::VectorXd& lags) {
  const auto n = lags.size();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = lags[std::abs(i - j)];
  }
  return m;
}

double signal_scale(const LOConfig& lo, double eta_PD) {
  if (!(eta_PD > 0 && eta_PD <= 1)) {
    throw ValidationError("must be in (0, 1]", "circuit.eta_PD");
  }
  return std::sqrt(eta_PD) * constants::elementary_charge * std::sqrt(lo_photon_number(lo));
}

}  // namespace

KernelMatrix build_E_from_psd(const std::function<double(double)>& psd, const SamplingGrid& grid,
                              double f_scale, const EBuildOptions& opt) {
  grid.validate();
  opt.validate();
  if (!(f_scale > 0) || !std::isfinite(f_scale)) {
    throw ValidationError("frequency scale must be strictly positive", "e_build.f_scale");
  }
  const double f_max = opt.f_max_over_f0 * f_scale;
  const double df = opt.df_over_f0 * f_scale;

  Eigen::VectorXd lags = covariance_lags(psd, grid, f_max, df, opt.taper_fraction);
  if (opt.convergence_check) {
    const Eigen::VectorXd finer = covariance_lags(psd, grid, f_max, df / 2.0, opt.taper_fraction);
    const double scale = finer.cwiseAbs().maxCoeff();
    const double change = (finer - lags).cwiseAbs().maxCoeff();
    if (!(scale > 0) || change > 1e-3 * scale) {
      std::ostringstream msg;
      msg << "electronic kernel quadrature did not converge: halving the frequency step moved "
             "entries by "
          << (scale > 0 ? change / scale : std::numeric_limits<double>::infinity())
          << " of the peak (tolerance 1e-3); refine e_build.df_over_f0 or extend "
             "e_build.f_max_over_f0";
      throw NumericalError(msg.str());
    }
    lags = finer;
  }

  KernelMatrix k;
  k.role = KernelRole::Electronic;
  k.grid = grid;
  k.values = toeplitz_from_lags(lags);
  k.provenance.kind = Provenance::Kind::Model;
  return k;
}

KernelMatrix build_E(const DerivedParams& dp, const SamplingGrid& grid, const EBuildOptions& opt) {
  return build_E_from_psd([&dp](double f) { return electronic_psd(dp, f); }, grid, dp.f0, opt);
}

double electronic_variance(const DerivedParams& dp) {
  return constants::pi * dp.f0 * (dp.n_c + dp.n_f) / dp.p;
}

Eigen::VectorXd sampled_response_shape(const DerivedParams& dp, const SamplingGrid& grid) {
  grid.validate();
  const double decay = impulse_decay_rate(dp);
  // Enough wrapped periods that the discarded tail is below double precision
  // of the accumulated sum (exp(-32.3) ~ 1e-14).
  const double periods = 32.3 / (decay * grid.T);
  const long m_max = std::clamp(static_cast<long>(std::ceil(periods)), 1L, 65536L);
  const double t_shift = grid.T / 2.0 - impulse_peak_time(dp);

  Eigen::VectorXd shape(grid.L);
  for (int l = 0; l < grid.L; ++l) {
    const double t = grid.time(l) - t_shift;
    double acc = 0.0;
    for (long m = m_max; m >= 0; --m) acc += impulse_response(dp, t + static_cast<double>(m) * grid.T);
    shape[l] = acc;
  }
  return shape;
}

Eigen::VectorXd sampled_response(const DerivedParams& dp, const SamplingGrid& grid,
                                 const LOConfig& lo, double eta_PD) {
  return signal_scale(lo, eta_PD) * sampled_response_shape(dp, grid);
}

namespace {

// Largest |impulse response| between one and two periods after the pulse,
// as a fraction of the peak value.
double tail_fraction(const DerivedParams& dp, double T) {
  const double peak = impulse_response(dp, impulse_peak_time(dp));
  double tail = 0.0;
  constexpr int n_probe = 1024;
  for (int i = 0; i < n_probe; ++i) {
    const double t = T + (static_cast<double>(i) / n_probe) * T;
    tail = std::max(tail, std::abs(impulse_response(dp, t)));
  }
  return tail / peak;
}

}  // namespace

KernelMatrix build_R(const DerivedParams& dp, const SamplingGrid& grid, const LOConfig& lo,
                     double eta_PD) {
  const Eigen::VectorXd rho = sampled_response(dp, grid, lo, eta_PD);
  KernelMatrix k;
  k.role = KernelRole::Response;
  k.grid = grid;
  k.values = rho * rho.transpose();
  k.provenance.kind = Provenance::Kind::Model;
  const double tail = tail_fraction(dp, grid.T);
  if (tail > 0.01) {
    std::ostringstream msg;
    msg << "impulse response retains " << 100.0 * tail
        << "% of its peak one period after the pulse (> 1%); single-window response model "
           "neglects inter-pulse correlations of that size";
    k.warning = msg.str();
  }
  return k;
}

KernelMatrix build_R_crosstalk(const DerivedParams& dp, const SamplingGrid& grid,
                               const LOConfig& lo, double eta_PD, int n_neighbors) {
  if (n_neighbors < 0) {
    throw ValidationError("neighbor count must be >= 0", "kernels.n_neighbors");
  }
  grid.validate();
  const double scale = signal_scale(lo, eta_PD);
  const double t_shift = grid.T / 2.0 - impulse_peak_time(dp);

  KernelMatrix k;
  k.role = KernelRole::Response;
  k.grid = grid;
  k.values = Eigen::MatrixXd::Zero(grid.L, grid.L);
  k.provenance.kind = Provenance::Kind::Model;
  // Pulse j periods before the window contributes its plainly sampled (not
  // wrapped) response; pulses after the window are silent by causality.
  for (int j = -n_neighbors; j <= n_neighbors; ++j) {
    Eigen::VectorXd rho(grid.L);
    for (int l = 0; l < grid.L; ++l) {
      rho[l] = scale * impulse_response(dp, grid.time(l) - t_shift + static_cast<double>(j) * grid.T);
    }
    k.values.noalias() += rho * rho.transpose();
  }
  return k;
}

namespace {

void require_compatible(const KernelMatrix& a, const KernelMatrix& b) {
  if (a.values.rows() != a.values.cols() || b.values.rows() != b.values.cols() ||
      a.values.rows() != b.values.rows()) {
    throw ValidationError("kernel matrices have mismatched shapes");
  }
  if (!a.grid.same_as(b.grid)) {
    throw ValidationError("kernel matrices are defined on different sampling grids");
  }
}

Provenance combine_provenance(const Provenance& a, const Provenance& b) {
  Provenance out;
  const bool est_a = a.kind == Provenance::Kind::Estimated;
  const bool est_b = b.kind == Provenance::Kind::Estimated;
  if (est_a || est_b) {
    out.kind = Provenance::Kind::Estimated;
    if (est_a && est_b) out.n_windows = std::min(a.n_windows, b.n_windows);
    else out.n_windows = est_a ? a.n_windows : b.n_windows;
    out.low_statistics = a.low_statistics || b.low_statistics;
  }
  return out;
}

std::string combine_warnings(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + "; " + b;
}

}  // namespace

KernelMatrix add(const KernelMatrix& electronic, const KernelMatrix& response) {
  if (electronic.role != KernelRole::Electronic || response.role != KernelRole::Response) {
    throw ValidationError("kernel sum expects an electronic and a response kernel");
  }
  require_compatible(electronic, response);
  KernelMatrix k;
  k.role = KernelRole::Shot;
  k.grid = electronic.grid;
  k.values = electronic.values + response.values;
  k.provenance = combine_provenance(electronic.provenance, response.provenance);
  k.warning = combine_warnings(electronic.warning, response.warning);
  return k;
}

KernelMatrix subtract(const KernelMatrix& shot, const KernelMatrix& electronic) {
  if (shot.role != KernelRole::Shot || electronic.role != KernelRole::Electronic) {
    throw ValidationError("kernel difference expects a shot and an electronic kernel");
  }
  require_compatible(shot, electronic);
  KernelMatrix k;
  k.role = KernelRole::Response;
  k.grid = shot.grid;
  k.values = shot.values - electronic.values;
  k.provenance = combine_provenance(shot.provenance, electronic.provenance);
  k.warning = combine_warnings(shot.warning, electronic.warning);
  return k;
}

EigDecomposition eig_decompose(const KernelMatrix& k) {
  const Eigen::MatrixXd& a = k.values;
  if (a.rows() != a.cols()) throw ValidationError("kernel matrix must be square");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "kernel matrix is not symmetric: max |A - A^T| = " << asym << " vs " << 1e-12 * scale
        << " allowed";
    throw ValidationError(msg.str());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (a + a.transpose()));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed to converge");
  }

  const auto n = a.rows();
  EigDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues[i] = solver.eigenvalues()[n - 1 - i];
    out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    // Deterministic sign: the entry of largest magnitude (lowest index on
    // ties) is made positive.
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double mag = std::abs(out.eigenvectors(r, i));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (out.eigenvectors(arg, i) < 0) out.eigenvectors.col(i) = -out.eigenvectors.col(i);
  }

  const Eigen::MatrixXd recon =
      out.eigenvectors * out.eigenvalues.asDiagonal() * out.eigenvectors.transpose();
  const double err = (recon - 0.5 * (a + a.transpose())).cwiseAbs().maxCoeff();
  if (err > 1e-9 * std::max(scale, 1e-300)) {
    std::ostringstream msg;
    msg << "eigendecomposition reconstruction error " << err << " exceeds " << 1e-9 * scale;
    throw NumericalError(msg.str());
  }
  return out;
}

double snr_of_weight(const Eigen::VectorXd& w, const KernelMatrix& shot,
                     const KernelMatrix& electronic) {
  if (shot.role != KernelRole::Shot || electronic.role != KernelRole::Electronic) {
    throw ValidationError("snr expects a shot kernel and an electronic kernel");
  }
  require_compatible(shot, electronic);
  if (w.size() != shot.values.rows()) {
    throw ValidationError("weight length does not match kernel dimension");
  }
  const double den = w.dot(electronic.values * w);
  if (!(den > 0) || !std::isfinite(den)) {
    throw NumericalError("degenerate noise denominator: w^T E w is not strictly positive");
  }
  return w.dot(shot.values * w) / den;
}

double efficiency_from_snr(double snr) {
  if (!(snr >= 1.0)) {
    throw ValidationError("snr must be >= 1 (shot kernel includes the electronic floor)");
  }
  return 1.0 - 1.0 / snr;
}

}  // namespace uhd
