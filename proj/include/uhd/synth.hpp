#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "uhd/circuit.hpp"
#include "uhd/grid.hpp"
#include "uhd/kernels.hpp"

namespace uhd {

// Gaussian state of the measured quadrature, vacuum-normalized (vacuum
// variance = 1). A squeezed state prepared with efficiency eta0 and measured
// at `phase` from the squeezing axis has variance
//   (1 - eta0) + eta0 * (exp(-2r) cos^2 + exp(+2r) sin^2).
struct StateSpec {
  enum class Kind { Vacuum, Squeezed } kind = Kind::Vacuum;
  double r = 0;      // squeezing parameter, >= 0
  double eta0 = 1;   // preparation efficiency, in (0, 1]
  double phase = 0;  // measured quadrature angle (rad); 0 = squeezed axis

  static StateSpec vacuum() { return {}; }
  static StateSpec squeezed(double r, double eta0, double phase);

  void validate() const;
  double variance() const;
};

nlohmann::json to_json(const StateSpec& s);
StateSpec state_from_json(const nlohmann::json& j, const std::string& path = "state");

// A synthesized or recorded block of homodyne output, window-major: column j
// of `samples` holds the L voltage samples of repetition period j.
struct TraceSet {
  SamplingGrid grid;
  Eigen::MatrixXd samples;  // L x J (V)
  std::uint64_t seed = 0;
  bool offset_corrected = false;
  // Windows at each end that carry synthesis or resampling edge transients
  // and must be excluded from kernel estimation.
  int edge_invalid = 0;
  nlohmann::json truth;  // generation record (parameters, drawn quadratures)

  long windows() const { return samples.cols(); }
  double sample_rate() const { return grid.sample_rate(); }
};

// One quadrature draw per window: sqrt(variance) * standard normal, from the
// quadrature random stream of `seed`.
Eigen::VectorXd synth_quadratures(const StateSpec& state, long J, std::uint64_t seed);

// Stationary Gaussian electronic noise sampled at `fs`, generated in the
// frequency domain from the alias-folded, band-tapered circuit PSD so the
// sample covariance matches the model electronic kernel built with the same
// band options. Deterministic in (seed); bin m consumes normals 2m, 2m+1 of
// the electronic stream.
Eigen::VectorXd synth_electronic(const DerivedParams& dp, long n, double fs, std::uint64_t seed,
                                 const EBuildOptions& band = {});

struct SynthOptions {
  // false: each pulse's (periodized) response is confined to its own window,
  //        so every window's second moment is exactly E + V(X) rho rho^T.
  // true:  physically causal tails r(t - jT - j*drift) are summed over the
  //        pulse train, so late samples of one window carry the previous
  //        pulses' responses (inter-window correlations, startup transient).
  bool crosstalk = false;
  EBuildOptions band;  // must match the options used for the model kernels
};

// Synthesizes J windows of detector output for the given circuit, LO and
// input state, with a timing drift of `drift` seconds per repetition period
// (|drift| <= T/L). P_LO = 0 produces a dark (electronic-only) trace.
TraceSet synth_trace(const CircuitParams& cp, const SamplingGrid& grid, const LOConfig& lo,
                     const StateSpec& state, double drift, std::uint64_t seed, long J,
                     const SynthOptions& opts = {});

}  // namespace uhd
