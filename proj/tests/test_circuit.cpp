#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <fftw3.h>
#include <json.hpp>

#include "uhd/circuit.hpp"
#include "uhd/constants.hpp"
#include "uhd/errors.hpp"
#include "uhd/grid.hpp"
#include "uhd/rng.hpp"

using nlohmann::json;

namespace {

// Reference values computed independently with a high-precision script from
// the defining relations C_t = 2*C_p + C_f + C_a, f0 = sqrt(GBW/(2 pi R_f
// C_t)), p = f0*(2 pi R_f C_f + 1/GBW), n_c = e_n^2 + 4 kB T_e R_f +
// (i_n R_f)^2, n_f = (2 pi e_n R_f C_t f0)^2.
struct Frozen {
  const char* name;
  double C_t, f0, p, n_c, n_f, t_peak;
};
const Frozen kFrozen[] = {
    {"set1", 1.10e-11, 1.3076425890e8, 2.7448623290, 1.2319114591e-16, 7.0458130185e-16,
     1.08544176e-09},
    {"set2", 1.35e-11, 2.1442503275e8, 2.0758891006, 2.3507719974e-17, 2.6203436846e-16,
     7.32992715e-10},
    {"set3", 1.90e-11, 1.8074469899e8, 1.1819972317, 2.3507719974e-17, 3.6878911116e-16,
     1.02445196e-09},
};

}  // namespace

TEST_CASE("derived parameters match reference values for all presets") {
  for (const auto& f : kFrozen) {
    CAPTURE(f.name);
    const uhd::DerivedParams dp = uhd::derive_params(uhd::preset(f.name));
    CHECK(dp.C_t == doctest::Approx(f.C_t).epsilon(1e-12));
    CHECK(dp.f0 == doctest::Approx(f.f0).epsilon(1e-9));
    CHECK(dp.p == doctest::Approx(f.p).epsilon(1e-9));
    CHECK(dp.n_c == doctest::Approx(f.n_c).epsilon(1e-9));
    CHECK(dp.n_f == doctest::Approx(f.n_f).epsilon(1e-9));
  }
}

TEST_CASE("electronic PSD peaks where the reference scan says it should") {
  const uhd::DerivedParams dp = uhd::derive_params(uhd::preset("set3"));
  const double f_max = 1.76842070e8;
  const double s_max = 2.81157383e-16;
  CHECK(uhd::electronic_psd(dp, f_max) == doctest::Approx(s_max).epsilon(1e-6));
  CHECK(uhd::electronic_psd(dp, 0.98 * f_max) < s_max);
  CHECK(uhd::electronic_psd(dp, 1.02 * f_max) < s_max);
  CHECK(uhd::electronic_psd(dp, -f_max) == uhd::electronic_psd(dp, f_max));
}

TEST_CASE("transfer function DC value and -3 dB point") {
  const uhd::DerivedParams dp = uhd::derive_params(uhd::preset("set1"));
  CHECK(std::abs(uhd::transfer_function(dp, 0.0)) == doctest::Approx(3.3e3).epsilon(1e-12));
  const double f3 = 5.47259264e7;
  const double mag2 = std::norm(uhd::transfer_function(dp, f3));
  CHECK(mag2 == doctest::Approx(0.5 * 3.3e3 * 3.3e3).epsilon(1e-6));
}

TEST_CASE("impulse response is causal, peaks at the reference time, integrates to R_f") {
  for (const auto& f : kFrozen) {
    CAPTURE(f.name);
    const uhd::DerivedParams dp = uhd::derive_params(uhd::preset(f.name));
    CHECK(uhd::impulse_response(dp, -1e-12) == 0.0);
    CHECK(uhd::impulse_response(dp, -1e-9) == 0.0);

    const double tp = uhd::impulse_peak_time(dp);
    CHECK(tp == doctest::Approx(f.t_peak).epsilon(1e-6));
    const double peak = uhd::impulse_response(dp, tp);
    CHECK(uhd::impulse_response(dp, tp * 0.999) < peak);
    CHECK(uhd::impulse_response(dp, tp * 1.001) < peak);

    // DC gain: integral of r(t) equals |r~(0)| = R_f.
    const double t_end = 40.0 / uhd::impulse_decay_rate(dp);
    const long n = 400000;
    const double dt = t_end / n;
    double area = 0.0;
    for (long i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      area += w * uhd::impulse_response(dp, i * dt);
    }
    area *= dt;
    CHECK(area == doctest::Approx(dp.R_f).epsilon(1e-6));
  }
}

TEST_CASE("impulse response branches agree across the critical-damping seam") {
  uhd::DerivedParams dp;
  dp.R_f = 1.0e3;
  dp.f0 = 2.0e8;
  dp.n_c = dp.n_f = 1e-16;
  const double w0 = 2 * uhd::constants::pi * dp.f0;
  for (double t : {0.05 / w0, 0.7 / w0, 2.0 / w0, 6.0 / w0}) {
    dp.p = 2.0 - 1e-5;
    const double below = uhd::impulse_response(dp, t);
    dp.p = 2.0;
    const double at = uhd::impulse_response(dp, t);
    dp.p = 2.0 + 1e-5;
    const double above = uhd::impulse_response(dp, t);
    CHECK(below == doctest::Approx(at).epsilon(1e-4));
    CHECK(above == doctest::Approx(at).epsilon(1e-4));
  }
}

TEST_CASE("impulse response matches an inverse-FFT of the transfer function") {
  // Independent numeric oracle: sample r~(f) densely, inverse transform, and
  // compare against the closed forms on randomized circuits covering both
  // damping regimes.
  const long n_fft = 1 << 20;
  std::vector<std::complex<double>> spec(n_fft);
  std::vector<std::complex<double>> out(n_fft);

  int under = 0, over = 0;
  for (int trial = 0; trial < 20; ++trial) {
    uhd::CircuitParams cp = uhd::preset("set1");
    using uhd::rng::stream_scratch;
    using uhd::rng::uniform_at;
    cp.R_f = 500.0 + 4500.0 * uniform_at(99, stream_scratch, 3 * trial);
    cp.C_f = (0.5 + 1.5 * uniform_at(99, stream_scratch, 3 * trial + 1)) * 1e-12;
    cp.C_p = (2.0 + 6.0 * uniform_at(99, stream_scratch, 3 * trial + 2)) * 1e-12;
    const uhd::DerivedParams dp = uhd::derive_params(cp);
    (dp.p < 2.0 ? under : over)++;

    const double f_span = 1600.0 * dp.f0;  // two-sided bandwidth of the grid
    const double df = f_span / n_fft;
    const double dt = 1.0 / f_span;
    for (long k = 0; k < n_fft; ++k) {
      const double f = (k <= n_fft / 2) ? k * df : (k - n_fft) * df;
      spec[k] = uhd::transfer_function(dp, f);
    }
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n_fft),
                                      reinterpret_cast<fftw_complex*>(spec.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    const double peak = uhd::impulse_response(dp, uhd::impulse_peak_time(dp));
    double worst = 0.0;
    for (long i = 1; i < 16000; ++i) {
      const double numeric = out[i].real() * df;
      const double closed = uhd::impulse_response(dp, i * dt);
      worst = std::max(worst, std::abs(numeric - closed));
    }
    CAPTURE(trial);
    CAPTURE(dp.p);
    CHECK(worst <= 1e-3 * peak);
  }
  CHECK(under > 0);
  CHECK(over > 0);
}

TEST_CASE("LO photon number") {
  const uhd::LOConfig lo{2.7e-3, 8.0e-7, 1.25e-8};
  CHECK(uhd::lo_photon_number(lo) == doctest::Approx(1.3592114732e8).epsilon(1e-9));
  CHECK(uhd::lo_photon_number({0.0, 8.0e-7, 1.25e-8}) == 0.0);
  CHECK_THROWS_AS(uhd::lo_photon_number({-1e-3, 8.0e-7, 1.25e-8}), uhd::ValidationError);
  CHECK_THROWS_AS(uhd::lo_photon_number({1e-3, 0.0, 1.25e-8}), uhd::ValidationError);
}

TEST_CASE("presets and their validation") {
  CHECK(uhd::preset_names().size() == 3);
  CHECK_THROWS_AS(uhd::preset("set9"), uhd::ValidationError);
  uhd::CircuitParams cp = uhd::preset("set2");
  CHECK(cp.R_f == 1.0e3);
  CHECK(cp.eta_PD == 0.9);
  cp.eta_PD = 1.5;
  CHECK_THROWS_AS(cp.validate(), uhd::ValidationError);
  cp = uhd::preset("set2");
  cp.R_f = -3.0;
  CHECK_THROWS_AS(cp.validate(), uhd::ValidationError);
}

TEST_CASE("circuit JSON round trip, overrides, and field paths in errors") {
  const uhd::CircuitParams cp = uhd::preset("set3");
  const uhd::CircuitParams back = uhd::circuit_from_json(uhd::to_json(cp));
  CHECK(back.R_f == cp.R_f);
  CHECK(back.C_p == cp.C_p);
  CHECK(back.T_e == cp.T_e);

  const uhd::CircuitParams tweaked =
      uhd::circuit_from_json(json{{"preset", "set1"}, {"R_f", 1.2e3}});
  CHECK(tweaked.R_f == 1.2e3);
  CHECK(tweaked.C_p == 4.0e-12);

  try {
    uhd::circuit_from_json(json{{"preset", "set1"}, {"bogus", 1}});
    FAIL("expected a validation error");
  } catch (const uhd::ValidationError& e) {
    CHECK(std::string(e.what()).find("circuit.bogus") != std::string::npos);
    CHECK(e.exit_code() == 2);
  }
  try {
    uhd::circuit_from_json(json{{"preset", "set1"}, {"eta_PD", 2.0}});
    FAIL("expected a validation error");
  } catch (const uhd::ValidationError& e) {
    CHECK(std::string(e.what()).find("eta_PD") != std::string::npos);
  }
}

TEST_CASE("LO JSON round trip and validation") {
  const uhd::LOConfig lo{2.7e-3, 8.0e-7, 1.25e-8};
  const uhd::LOConfig back = uhd::lo_from_json(uhd::to_json(lo));
  CHECK(back.P_LO == lo.P_LO);
  CHECK(back.lambda == lo.lambda);
  CHECK(back.T == lo.T);
  try {
    uhd::lo_from_json(json{{"P_LO", 1e-3}, {"lambda", 8e-7}});
    FAIL("expected a validation error");
  } catch (const uhd::ValidationError& e) {
    CHECK(std::string(e.what()).find("lo.T") != std::string::npos);
  }
}

TEST_CASE("sampling grid") {
  const uhd::SamplingGrid g{125, 1.25e-8};
  CHECK(g.sample_rate() == doctest::Approx(1e10));
  CHECK(g.dt() == doctest::Approx(1e-10));
  CHECK(g.time(0) == 0.0);
  CHECK(g.time(124) == doctest::Approx(124e-10));
  CHECK(g.same_as(uhd::SamplingGrid{125, 1.25e-8}));
  CHECK(!g.same_as(uhd::SamplingGrid{126, 1.25e-8}));
  CHECK_THROWS_AS((uhd::SamplingGrid{1, 1.25e-8}.validate()), uhd::ValidationError);
  CHECK_THROWS_AS((uhd::SamplingGrid{125, 0.0}.validate()), uhd::ValidationError);
}
