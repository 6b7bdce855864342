#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace uhd {

// Transimpedance homodyne detector front-end parameters.
struct CircuitParams {
  double R_f = 0;     // feedback resistance (ohm)
  double C_f = 0;     // feedback capacitance (F)
  double C_p = 0;     // photodiode capacitance (F)
  double C_a = 0;     // amplifier input capacitance (F)
  double GBW = 0;     // amplifier gain-bandwidth product (Hz)
  double i_n = 0;     // input current noise density (A/sqrt(Hz))
  double e_n = 0;     // input voltage noise density (V/sqrt(Hz))
  double T_e = 0;     // electronic temperature (K)
  double eta_PD = 0;  // photodiode quantum efficiency, in (0, 1]

  void validate() const;
};

// Second-order closed-loop model derived from CircuitParams.
struct DerivedParams {
  double C_t = 0;  // total capacitance 2*C_p + C_f + C_a (F)
  double f0 = 0;   // characteristic frequency (Hz)
  double p = 0;    // damping parameter (dimensionless)
  double n_c = 0;  // flat noise coefficient (V^2/Hz)
  double n_f = 0;  // f^2 noise coefficient (V^2/Hz per normalized frequency^2)
  double R_f = 0;  // carried along: DC transimpedance (ohm)
};

// Local-oscillator operating point. P_LO = 0 models an LO-off (dark) run.
struct LOConfig {
  double P_LO = 0;    // average power (W), >= 0
  double lambda = 0;  // wavelength (m)
  double T = 0;       // repetition period (s)

  void validate() const;
};

DerivedParams derive_params(const CircuitParams& cp);

// Electronic-noise power spectral density S_e(f), even in f (V^2/Hz).
double electronic_psd(const DerivedParams& dp, double f);

// Complex transimpedance r~(f) = R_f / (1 + i p f/f0 - (f/f0)^2) (ohm).
std::complex<double> transfer_function(const DerivedParams& dp, double f);

// Causal impulse response of the second-order system (V/C); 0 for t < 0.
double impulse_response(const DerivedParams& dp, double t);

// Time of the impulse-response maximum (s).
double impulse_peak_time(const DerivedParams& dp);

// Slowest exponential decay rate of the impulse-response envelope (1/s).
double impulse_decay_rate(const DerivedParams& dp);

// Mean LO photons per pulse, |alpha_p|^2 = P_LO * lambda * T / (h c).
double lo_photon_number(const LOConfig& lo);

// Built-in parameter sets ("set1", "set2", "set3").
CircuitParams preset(std::string_view name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const CircuitParams& cp);
CircuitParams circuit_from_json(const nlohmann::json& j, const std::string& path = "circuit");

nlohmann::json to_json(const LOConfig& lo);
LOConfig lo_from_json(const nlohmann::json& j, const std::string& path = "lo");

}  // namespace uhd
