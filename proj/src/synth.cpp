#include "uhd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <fftw3.h>

#include "uhd/constants.hpp"
#include "uhd/errors.hpp"
#include "uhd/rng.hpp"
#include "uhd/threading.hpp"

namespace uhd {

StateSpec StateSpec::squeezed(double r, double eta0, double phase) {
  StateSpec s;
  s.kind = Kind::Squeezed;
  s.r = r;
  s.eta0 = eta0;
  s.phase = phase;
  s.validate();
  return s;
}

void StateSpec::validate() const {
  if (kind == Kind::Vacuum) return;
  if (!(r >= 0) || !std::isfinite(r)) {
    throw ValidationError("squeezing parameter must be >= 0", "state.r");
  }
  if (!(eta0 > 0 && eta0 <= 1)) {
    throw ValidationError("preparation efficiency must be in (0, 1]", "state.eta0");
  }
  if (!std::isfinite(phase)) {
    throw ValidationError("quadrature phase must be finite", "state.phase");
  }
}

double StateSpec::variance() const {
  if (kind == Kind::Vacuum) return 1.0;
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  return (1.0 - eta0) + eta0 * (std::exp(-2.0 * r) * c * c + std::exp(2.0 * r) * s * s);
}

nlohmann::json to_json(const StateSpec& s) {
  if (s.kind == StateSpec::Kind::Vacuum) return nlohmann::json{{"kind", "vacuum"}};
  return nlohmann::json{{"kind", "squeezed"}, {"r", s.r}, {"eta0", s.eta0}, {"phase", s.phase}};
}

StateSpec state_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ValidationError("must be an object with a string 'kind'", path);
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "vacuum") return StateSpec::vacuum();
  if (kind != "squeezed") {
    throw ValidationError("unknown state kind '" + kind + "' (expected vacuum|squeezed)",
                          path + ".kind");
  }
  auto get = [&](const char* key, double fallback, bool required) {
    if (!j.contains(key)) {
      if (required) throw ValidationError("missing field", path + "." + key);
      return fallback;
    }
    if (!j.at(key).is_number()) throw ValidationError("must be a number", path + "." + key);
    return j.at(key).get<double>();
  };
  StateSpec s;
  s.kind = StateSpec::Kind::Squeezed;
  s.r = get("r", 0.0, true);
  s.eta0 = get("eta0", 1.0, false);
  s.phase = get("phase", 0.0, false);
  s.validate();
  return s;
}

Eigen::VectorXd synth_quadratures(const StateSpec& state, long J, std::uint64_t seed) {
  state.validate();
  if (J < 0) throw ValidationError("window count must be >= 0", "synth.J");
  Eigen::VectorXd x(J);
  rng::fill_normals(seed, rng::stream_quadrature, 0, {x.data(), static_cast<std::size_t>(J)});
  x *= std::sqrt(state.variance());
  return x;
}

namespace {

double band_taper(double f, double f_max, double taper_fraction) {
  const double u = f / f_max;
  if (u > 1.0) return 0.0;
  if (taper_fraction <= 0 || u <= 1.0 - taper_fraction) return 1.0;
  return 0.5 * (1.0 + std::cos(constants::pi * (u - (1.0 - taper_fraction)) / taper_fraction));
}

long next_pow2(long n) {
  long m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

Eigen::VectorXd synth_electronic(const DerivedParams& dp, long n, double fs, std::uint64_t seed,
                                 const EBuildOptions& band) {
  band.validate();
  if (n < 1) throw ValidationError("sample count must be >= 1", "synth.n");
  if (!(fs > 0) || !std::isfinite(fs)) {
    throw ValidationError("sample rate must be strictly positive", "synth.fs");
  }

  // The block length must comfortably exceed the noise correlation time so
  // the circular wrap inherent to spectral synthesis is below measurement
  // noise, and it must hold the requested samples.
  const double t_corr = 8.0 / impulse_decay_rate(dp);
  const long min_len = static_cast<long>(std::ceil(8.0 * t_corr * fs));
  const long M = next_pow2(std::max(n, std::max(min_len, 16L)));
  const long n_bins = M / 2 + 1;

  const double f_max = band.f_max_over_f0 * dp.f0;
  const long k_span = static_cast<long>(std::ceil(f_max / fs)) + 1;

  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_bins));
  auto* out = static_cast<double*>(fftw_malloc(sizeof(double) * M));
  if (spec == nullptr || out == nullptr) {
    fftw_free(spec);
    fftw_free(out);
    throw NumericalError("failed to allocate synthesis buffers");
  }

  parallel_chunks(n_bins, 1L << 16, [&](std::int64_t begin, std::int64_t end, std::size_t) {
    for (std::int64_t m = begin; m < end; ++m) {
      const double f = static_cast<double>(m) * fs / static_cast<double>(M);
      // Two-sided PSD of the sampled process: the continuous band folded
      // into [0, fs/2], with the same high-frequency taper as the model
      // electronic kernel.
      double psd = 0.0;
      for (long k = -k_span; k <= k_span; ++k) {
        const double fa = std::abs(f + static_cast<double>(k) * fs);
        if (fa <= f_max) psd += band_taper(fa, f_max, band.taper_fraction) * electronic_psd(dp, fa);
      }
      const auto z = rng::normal4(seed, rng::stream_electronic, static_cast<std::uint64_t>(m) >> 1);
      const int lane = (m & 1) ? 2 : 0;
      if (m == 0 || m == M / 2) {
        spec[m][0] = std::sqrt(fs * static_cast<double>(M) * psd) * z[lane];
        spec[m][1] = 0.0;
      } else {
        const double amp = std::sqrt(fs * static_cast<double>(M) * psd / 2.0);
        spec[m][0] = amp * z[lane];
        spec[m][1] = amp * z[lane + 1];
      }
    }
  });

  fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(M), spec, out, FFTW_ESTIMATE);
  if (plan == nullptr) {
    fftw_free(spec);
    fftw_free(out);
    throw NumericalError("failed to plan the synthesis transform");
  }
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  Eigen::VectorXd x(n);
  const double inv_m = 1.0 / static_cast<double>(M);
  for (long l = 0; l < n; ++l) x[l] = out[l] * inv_m;
  fftw_free(spec);
  fftw_free(out);
  return x;
}

namespace {

// T-periodic steady-state pulse response: sum of causal impulse responses of
// a pulse train with period T, evaluated at u (any real argument).
class PeriodizedResponse {
 public:
  PeriodizedResponse(const DerivedParams& dp, double T) : dp_(dp), T_(T) {
    const double periods = 32.3 / (impulse_decay_rate(dp) * T);
    m_max_ = std::clamp(static_cast<long>(std::ceil(periods)), 1L, 65536L);
  }

  double operator()(double u) const {
    u -= T_ * std::floor(u / T_);
    double acc = 0.0;
    for (long m = m_max_; m >= 0; --m) acc += impulse_response(dp_, u + static_cast<double>(m) * T_);
    return acc;
  }

  long tail_periods() const { return m_max_; }

 private:
  DerivedParams dp_;
  double T_;
  long m_max_ = 1;
};

}  // namespace

TraceSet synth_trace(const CircuitParams& cp, const SamplingGrid& grid, const LOConfig& lo,
                     const StateSpec& state, double drift, std::uint64_t seed, long J,
                     const SynthOptions& opts) {
  grid.validate();
  lo.validate();
  state.validate();
  opts.band.validate();
  if (J < 1) throw ValidationError("must synthesize at least one window", "synth.J");
  if (std::abs(lo.T - grid.T) > 1e-12 * grid.T) {
    throw ValidationError("repetition period must match the sampling grid", "lo.T");
  }
  if (!(std::abs(drift) <= grid.dt())) {
    std::ostringstream msg;
    msg << "timing drift " << drift << " s/period exceeds one sample step " << grid.dt() << " s";
    throw ValidationError(msg.str(), "synth.drift");
  }

  const DerivedParams dp = derive_params(cp);
  const double scale =
      std::sqrt(cp.eta_PD) * constants::elementary_charge * std::sqrt(lo_photon_number(lo));
  const Eigen::VectorXd x = synth_quadratures(state, J, seed);
  const Eigen::VectorXd noise = synth_electronic(dp, J * grid.L, grid.sample_rate(), seed, opts.band);

  TraceSet ts;
  ts.grid = grid;
  ts.seed = seed;
  ts.samples.resize(grid.L, J);
  std::copy(noise.data(), noise.data() + J * grid.L, ts.samples.data());

  const double t_shift = grid.T / 2.0 - impulse_peak_time(dp);
  const PeriodizedResponse psi(dp, grid.T);

  if (scale > 0) {
    if (!opts.crosstalk) {
      if (drift == 0.0) {
        Eigen::VectorXd rho(grid.L);
        for (int l = 0; l < grid.L; ++l) rho[l] = scale * psi(grid.time(l) - t_shift);
        parallel_chunks(J, 1024, [&](std::int64_t begin, std::int64_t end, std::size_t) {
          for (std::int64_t j = begin; j < end; ++j) ts.samples.col(j) += x[j] * rho;
        });
      } else {
        parallel_chunks(J, 256, [&](std::int64_t begin, std::int64_t end, std::size_t) {
          for (std::int64_t j = begin; j < end; ++j) {
            const double offset = t_shift + static_cast<double>(j) * drift;
            for (int l = 0; l < grid.L; ++l) {
              ts.samples(l, j) += x[j] * scale * psi(grid.time(l) - offset);
            }
          }
        });
      }
      ts.edge_invalid = 0;
    } else {
      const long n_tail = psi.tail_periods() + 1;
      parallel_chunks(J, 256, [&](std::int64_t begin, std::int64_t end, std::size_t) {
        for (std::int64_t jw = begin; jw < end; ++jw) {
          for (int l = 0; l < grid.L; ++l) {
            const double t = static_cast<double>(jw) * grid.T + grid.time(l);
            double acc = 0.0;
            const long j_lo = std::max<long>(0, jw - n_tail);
            const long j_hi = std::min<long>(J - 1, jw + 1);
            for (long j = j_lo; j <= j_hi; ++j) {
              const double arg =
                  t - static_cast<double>(j) * grid.T - static_cast<double>(j) * drift - t_shift;
              acc += x[j] * impulse_response(dp, arg);
            }
            ts.samples(l, jw) += scale * acc;
          }
        }
      });
      ts.edge_invalid = static_cast<int>(std::min<long>(n_tail, J / 2));
    }
  }

  std::vector<double> quads(x.data(), x.data() + x.size());
  ts.truth = nlohmann::json{{"seed", seed},
                            {"J", J},
                            {"grid", {{"L", grid.L}, {"T", grid.T}}},
                            {"circuit", to_json(cp)},
                            {"lo", to_json(lo)},
                            {"state", to_json(state)},
                            {"drift", drift},
                            {"mode", opts.crosstalk ? "crosstalk" : "confined"},
                            {"band",
                             {{"f_max_over_f0", opts.band.f_max_over_f0},
                              {"df_over_f0", opts.band.df_over_f0},
                              {"taper_fraction", opts.band.taper_fraction}}},
                            {"quadratures", quads}};
  return ts;
}

}  // namespace uhd
