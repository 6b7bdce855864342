#include "uhd/optimizer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "uhd/constants.hpp"
#include "uhd/errors.hpp"

namespace uhd {

TruncationBasis fourier_basis(const SamplingGrid& grid, int N) {
  grid.validate();
  if (N < 0) throw ValidationError("harmonic count must be >= 0", "optimize.N");
  if (2 * N + 1 > grid.L) {
    std::ostringstream msg;
    msg << "basis with N=" << N << " needs 2N+1=" << 2 * N + 1 << " columns but the grid has only "
        << grid.L << " samples";
    throw ValidationError(msg.str(), "optimize.N");
  }

  TruncationBasis basis;
  basis.N = N;
  basis.grid = grid;
  basis.f_c = static_cast<double>(N) / grid.T;
  basis.U.resize(grid.L, 2 * N + 1);
  const double L = grid.L;
  for (int l = 0; l < grid.L; ++l) basis.U(l, 0) = std::sqrt(1.0 / L);
  for (int k = 1; k <= N; ++k) {
    for (int l = 0; l < grid.L; ++l) {
      const double phase = 2.0 * constants::pi * k * l / L;
      basis.U(l, 2 * k - 1) = std::sqrt(2.0 / L) * std::sin(phase);
      basis.U(l, 2 * k) = std::sqrt(2.0 / L) * std::cos(phase);
    }
  }
  return basis;
}

WeightVector optimize_weight(const KernelMatrix& shot, const KernelMatrix& electronic, int N) {
  if (shot.role != KernelRole::Shot || electronic.role != KernelRole::Electronic) {
    throw ValidationError("weight optimization expects a shot kernel and an electronic kernel");
  }
  if (!shot.grid.same_as(electronic.grid)) {
    throw ValidationError("kernel matrices are defined on different sampling grids");
  }
  const TruncationBasis basis = fourier_basis(shot.grid, N);
  const int d = 2 * N + 1;

  Eigen::MatrixXd s_proj = basis.U.transpose() * shot.values * basis.U;
  Eigen::MatrixXd e_proj = basis.U.transpose() * electronic.values * basis.U;
  s_proj = 0.5 * (s_proj + s_proj.transpose()).eval();
  e_proj = 0.5 * (e_proj + e_proj.transpose()).eval();

  const double ridge = 1e-10 * e_proj.trace() / d;
  Eigen::MatrixXd e_reg = e_proj + ridge * Eigen::MatrixXd::Identity(d, d);

  Eigen::LLT<Eigen::MatrixXd> llt(e_reg);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diag(e_proj, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "projected noise matrix is not positive definite even after ridging; smallest "
           "eigenvalue "
        << (diag.info() == Eigen::Success ? diag.eigenvalues().minCoeff()
                                          : std::numeric_limits<double>::quiet_NaN());
    throw NumericalError(msg.str());
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(s_proj, e_reg);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("generalized eigenproblem failed to converge");
  }

  // Eigen sorts ascending; the optimum is the last eigenvector.
  Eigen::VectorXd w = basis.U * solver.eigenvectors().col(d - 1);
  const double norm = w.norm();
  if (!(norm > 0) || !std::isfinite(norm)) {
    throw NumericalError("optimized weight collapsed to zero norm");
  }
  w /= norm;

  // Deterministic sign: align with the leading eigenvector of the response
  // part S - E, whose own sign is pinned by eig_decompose.
  KernelMatrix response = subtract(shot, electronic);
  const EigDecomposition rd = eig_decompose(response);
  if (w.dot(rd.eigenvectors.col(0)) < 0) w = -w;

  WeightVector out;
  out.values = w;
  out.method = "optimal";
  out.N = N;
  out.f_c = basis.f_c;
  out.peak_width = 0;
  out.achieved_snr = snr_of_weight(w, shot, electronic);
  return out;
}

WeightVector constant_weight(const SamplingGrid& grid) {
  grid.validate();
  WeightVector out;
  out.values = Eigen::VectorXd::Constant(grid.L, 1.0 / std::sqrt(static_cast<double>(grid.L)));
  out.method = "constant";
  out.achieved_snr = std::numeric_limits<double>::quiet_NaN();
  return out;
}

WeightVector peak_weight(const DerivedParams& dp, const SamplingGrid& grid, double width) {
  grid.validate();
  if (!(width >= grid.dt())) {
    std::ostringstream msg;
    msg << "boxcar width " << width << " s is below one sample step " << grid.dt() << " s";
    throw ValidationError(msg.str(), "weight.peak_width");
  }
  const Eigen::VectorXd shape = sampled_response_shape(dp, grid);
  Eigen::Index center = 0;
  shape.maxCoeff(&center);

  const int n_w = std::max(1, static_cast<int>(std::llround(width / grid.dt())));
  const int lo = static_cast<int>(center) - (n_w - 1) / 2;
  const int hi = lo + n_w - 1;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.L);
  int count = 0;
  for (int l = std::max(lo, 0); l <= std::min(hi, grid.L - 1); ++l) {
    w[l] = 1.0;
    ++count;
  }
  w /= std::sqrt(static_cast<double>(count));

  WeightVector out;
  out.values = w;
  out.method = "peak";
  out.peak_width = width;
  out.achieved_snr = std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<SweepPoint> snr_vs_cutoff(const KernelMatrix& shot, const KernelMatrix& electronic,
                                      int N_min, int N_max) {
  if (N_min < 0 || N_max < N_min) {
    throw ValidationError("sweep range must satisfy 0 <= N_min <= N_max", "sweep.range");
  }
  std::vector<SweepPoint> points;
  points.reserve(static_cast<std::size_t>(N_max - N_min + 1));
  for (int N = N_min; N <= N_max; ++N) {
    const WeightVector w = optimize_weight(shot, electronic, N);
    points.push_back({N, w.f_c, w.achieved_snr});
  }
  return points;
}

Eigen::VectorXd crosstalk_coeffs(const DerivedParams& dp, const SamplingGrid& grid,
                                 const Eigen::VectorXd& w, int d_max) {
  grid.validate();
  if (d_max < 0) throw ValidationError("neighbor range must be >= 0", "crosstalk.d_max");
  if (w.size() != grid.L) {
    throw ValidationError("weight length does not match the sampling grid");
  }
  const double t_shift = grid.T / 2.0 - impulse_peak_time(dp);
  Eigen::VectorXd coeffs(2 * d_max + 1);
  for (int d = -d_max; d <= d_max; ++d) {
    double acc = 0.0;
    for (int l = 0; l < grid.L; ++l) {
      acc += w[l] * impulse_response(dp, grid.time(l) + d * grid.T - t_shift);
    }
    coeffs[d + d_max] = acc * grid.dt();
  }
  return coeffs;
}

}  // namespace uhd
