#include "uhd/resampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "uhd/constants.hpp"
#include "uhd/errors.hpp"
#include "uhd/estimator.hpp"
#include "uhd/threading.hpp"

namespace uhd {

void ResampleConfig::validate() const {
  if (up_factor < 2) throw ValidationError("interpolation factor must be >= 2", "resample.up_factor");
  if (up_factor > 512) throw ValidationError("interpolation factor above 512", "resample.up_factor");
  if (filter_half_len < 2 || filter_half_len > 256) {
    throw ValidationError("taps per side must be in [2, 256]", "resample.filter_half_len");
  }
  if (!(stopband_atten >= 20 && stopband_atten <= 160)) {
    throw ValidationError("stopband attenuation must be in [20, 160] dB", "resample.stopband_atten");
  }
  if (!(cutoff > 0 && cutoff <= 0.5)) {
    throw ValidationError("cutoff must be in (0, 0.5] of Nyquist", "resample.cutoff");
  }
}

namespace {

double bessel_i0(double x) {
  // Power series; converges quickly for the beta values Kaiser designs use.
  const double q = x * x / 4.0;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double kaiser_beta(double atten) {
  if (atten > 50.0) return 0.1102 * (atten - 8.7);
  if (atten >= 21.0) return 0.5842 * std::pow(atten - 21.0, 0.4) + 0.07886 * (atten - 21.0);
  return 0.0;
}

double sinc(double x) {
  // Exact at integers so the zero-shift subfilter is a true identity.
  if (x == std::floor(x)) return x == 0.0 ? 1.0 : 0.0;
  const double px = constants::pi * x;
  return std::sin(px) / px;
}

// Reflect an out-of-range flat index into [0, n).
long reflect(long k, long n) {
  while (k < 0 || k >= n) {
    if (k < 0) k = -k;
    if (k >= n) k = 2 * (n - 1) - k;
  }
  return k;
}

}  // namespace

Eigen::MatrixXd design_interp_filter(const ResampleConfig& cfg) {
  cfg.validate();
  const int half = cfg.filter_half_len;
  const int up = cfg.up_factor;
  const double beta = kaiser_beta(cfg.stopband_atten);
  const double i0_beta = bessel_i0(beta);

  Eigen::MatrixXd bank(up, 2 * half + 1);
  for (int phase = 0; phase < up; ++phase) {
    double dc = 0.0;
    for (int i = -half; i <= half; ++i) {
      const double x = static_cast<double>(i) - static_cast<double>(phase) / up;
      double tap = 0.0;
      if (std::abs(x) <= half) {
        const double u = x / half;
        tap = sinc(x) * bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
      }
      bank(phase, i + half) = tap;
      dc += tap;
    }
    bank.row(phase) /= dc;
  }
  return bank;
}

TraceSet align(const TraceSet& trace, double drift_per_period, const ResampleConfig& cfg) {
  trace.grid.validate();
  const long J = trace.windows();
  if (J < 1) throw ValidationError("trace has no windows", "trace.J");
  const int L = trace.grid.L;
  const long n_total = J * L;
  const double fs = trace.grid.sample_rate();
  const int half = cfg.filter_half_len;
  const int up = cfg.up_factor;

  const Eigen::MatrixXd bank = design_interp_filter(cfg);

  const double walk_samples = std::abs(drift_per_period) * static_cast<double>(J - 1) * fs;
  const long n_edge = std::max<long>(
      1, static_cast<long>(std::ceil((walk_samples + half + 1) / static_cast<double>(L))));
  if (2 * n_edge >= J) {
    std::ostringstream msg;
    msg << "drift walk of " << walk_samples << " samples leaves no usable windows in a " << J
        << "-window trace";
    throw ValidationError(msg.str(), "resample.drift");
  }

  TraceSet out = trace;
  out.offset_corrected = false;
  out.edge_invalid = static_cast<int>(std::max<long>(trace.edge_invalid, n_edge));
  const double* x = trace.samples.data();  // window-major == flat sample order

  parallel_chunks(J, 256, [&](std::int64_t begin, std::int64_t end, std::size_t) {
    for (std::int64_t j = begin; j < end; ++j) {
      const double shift = static_cast<double>(j) * drift_per_period * fs;  // input samples
      for (int l = 0; l < L; ++l) {
        const double u = static_cast<double>(j * L + l) + shift;
        const long m = std::llround(u * up);
        long q = m / up;
        if (m < 0 && q * up != m) --q;  // floor division
        const int phase = static_cast<int>(m - q * up);
        double acc = 0.0;
        for (int i = -half; i <= half; ++i) {
          acc += x[reflect(q + i, n_total)] * bank(phase, i + half);
        }
        out.samples(l, j) = acc;
      }
    }
  });

  nlohmann::json record{{"drift_per_period", drift_per_period},
                        {"up_factor", cfg.up_factor},
                        {"filter_half_len", cfg.filter_half_len},
                        {"stopband_atten", cfg.stopband_atten},
                        {"cutoff", cfg.cutoff}};
  if (!out.truth.is_object()) out.truth = nlohmann::json::object();
  out.truth["aligned"] = record;
  return out;
}

namespace {

// Single-pass drift fit: correlation-peak positions against window index.
// Reports the aggregate excess-power detection statistic through `peak_snr`
// (pulse peak power above the sidelobe level, summed over windows, relative
// to the summed sidelobe power).
double estimate_drift_once(const TraceSet& trace, double* peak_snr) {
  const long J = trace.windows();
  if (J < 4) throw ValidationError("drift estimation needs at least 4 windows", "trace.J");
  const int L = trace.grid.L;
  if (L < 8) throw ValidationError("drift estimation needs at least 8 samples per window", "grid.L");

  const TraceSet corrected = trace.offset_corrected ? trace : offset_correct(trace);
  const KernelMatrix second = estimate_kernel(corrected, KernelRole::Shot);
  const Eigen::VectorXd tmpl = eig_decompose(second).eigenvectors.col(0);

  const int max_lag = L / 2 - 1;
  const int guard = std::max(3, L / 4);
  const long j_lo = corrected.edge_invalid;
  const long j_hi = J - corrected.edge_invalid;

  struct Point {
    double j = 0, pos = 0, weight = 0, side2 = 0;
  };
  std::vector<Point> points(static_cast<std::size_t>(j_hi - j_lo));

  parallel_chunks(j_hi - j_lo, 512, [&](std::int64_t begin, std::int64_t end, std::size_t) {
    std::vector<double> c(static_cast<std::size_t>(2 * max_lag + 1));
    for (std::int64_t idx = begin; idx < end; ++idx) {
      const long j = j_lo + idx;
      const auto v = corrected.samples.col(j);
      for (int lag = -max_lag; lag <= max_lag; ++lag) {
        double acc = 0.0;
        const int l_min = std::max(0, -lag);
        const int l_max = std::min(L, L - lag);
        for (int l = l_min; l < l_max; ++l) acc += v[l + lag] * tmpl[l];
        c[static_cast<std::size_t>(lag + max_lag)] = acc;
      }
      int peak = 0;
      for (int i = 1; i < 2 * max_lag + 1; ++i) {
        if (std::abs(c[i]) > std::abs(c[peak])) peak = i;
      }
      Point pt;
      pt.j = static_cast<double>(j);
      if (peak == 0 || peak == 2 * max_lag) continue;  // boundary: unusable window

      double sidelobe = 0.0;
      for (int i = 0; i < 2 * max_lag + 1; ++i) {
        if (std::abs(i - peak) > guard) sidelobe = std::max(sidelobe, std::abs(c[i]));
      }
      const double amp = std::abs(c[peak]);
      pt.side2 = sidelobe * sidelobe;

      const double sign = c[peak] >= 0 ? 1.0 : -1.0;
      const double ym = sign * c[peak - 1];
      const double y0 = sign * c[peak];
      const double yp = sign * c[peak + 1];
      const double denom = ym - 2.0 * y0 + yp;
      double frac = 0.0;
      if (denom < 0) frac = std::clamp(0.5 * (ym - yp) / denom, -1.0, 1.0);
      pt.pos = static_cast<double>(peak - max_lag) + frac;
      // Excess peak power over the sidelobe level: windows whose "peak" is
      // just the largest noise excursion get ~zero weight instead of smearing
      // the fit with uniformly distributed junk positions.
      pt.weight = std::max(0.0, amp * amp - pt.side2);
      points[static_cast<std::size_t>(idx)] = pt;
    }
  });

  double w_sum = 0.0, side_sum = 0.0;
  for (const auto& pt : points) {
    w_sum += pt.weight;
    side_sum += pt.side2;
  }
  if (!(w_sum > 0)) throw NumericalError("no usable correlation peaks for drift estimation");
  // Pulse energy adds up across windows while noise sidelobes do not, so the
  // aggregate power ratio separates pulsed from pulse-free traces even though
  // individual windows carry Gaussian-amplitude pulses of arbitrary strength.
  if (peak_snr != nullptr) {
    *peak_snr = side_sum > 0 ? w_sum / side_sum : std::numeric_limits<double>::infinity();
  }

  // Weighted least-squares slope of peak position versus window index.
  double jm = 0.0, pm = 0.0;
  for (const auto& pt : points) {
    jm += pt.weight * pt.j;
    pm += pt.weight * pt.pos;
  }
  jm /= w_sum;
  pm /= w_sum;
  double num = 0.0, den = 0.0;
  for (const auto& pt : points) {
    num += pt.weight * (pt.j - jm) * (pt.pos - pm);
    den += pt.weight * (pt.j - jm) * (pt.j - jm);
  }
  if (!(den > 0)) throw NumericalError("drift fit is degenerate: all weight on one window");
  return (num / den) * trace.grid.dt();
}

}  // namespace

double estimate_drift(const TraceSet& trace) {
  // A single pass underestimates large walks: the template is smeared over
  // the whole drift excursion and windows at the extremes lose correlation
  // support at the window edge, compressing the fitted slope. Re-estimating
  // on a trace aligned by the running total removes both effects.
  const double dt = trace.grid.dt();
  double peak_snr = 0.0;
  double total = estimate_drift_once(trace, &peak_snr);
  for (int iter = 0; iter < 3; ++iter) {
    if (!(std::abs(total) * (trace.windows() - 1) > 0.1 * dt)) break;  // walk below noise
    const double step = estimate_drift_once(align(trace, total), &peak_snr);
    total += step;
    if (std::abs(step) <= 1e-3 * dt) break;
  }
  // Detectability is judged on the last (best-aligned) pass: genuine pulses
  // score low on the raw pass when the walk spans many samples but recover
  // once alignment unsmears them, whereas a pulse-free trace stays low no
  // matter how it is resampled. Measured separation on 12.5 ns / 125-sample
  // windows: pulse-free traces stay below 1.8, aligned pulsed traces stay
  // above 3.3; 2.4 is the geometric midpoint.
  if (peak_snr < 2.4) {
    std::ostringstream msg;
    msg << "no detectable pulses: correlation peak SNR " << peak_snr << " is below 2.4";
    throw NumericalError(msg.str());
  }
  return total;
}

}  // namespace uhd
