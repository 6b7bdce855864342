#include "uhd/circuit.hpp"

#include <cmath>

#include "uhd/constants.hpp"
#include "uhd/errors.hpp"

namespace uhd {

namespace {
constexpr double critical_damping_tol = 1e-6;

void require_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw ValidationError("must be strictly positive", std::string("circuit.") + name);
  }
}
}  // namespace

void CircuitParams::validate() const {
  require_positive(R_f, "R_f");
  require_positive(C_f, "C_f");
  require_positive(C_p, "C_p");
  require_positive(C_a, "C_a");
  require_positive(GBW, "GBW");
  require_positive(i_n, "i_n");
  require_positive(e_n, "e_n");
  require_positive(T_e, "T_e");
  if (!(eta_PD > 0 && eta_PD <= 1)) {
    throw ValidationError("must be in (0, 1]", "circuit.eta_PD");
  }
}

void LOConfig::validate() const {
  if (!(P_LO >= 0) || !std::isfinite(P_LO)) {
    throw ValidationError("must be >= 0", "lo.P_LO");
  }
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw ValidationError("must be strictly positive", "lo.lambda");
  }
  if (!(T > 0) || !std::isfinite(T)) {
    throw ValidationError("must be strictly positive", "lo.T");
  }
}

DerivedParams derive_params(const CircuitParams& cp) {
  cp.validate();
  DerivedParams dp;
  dp.C_t = 2 * cp.C_p + cp.C_f + cp.C_a;
  dp.f0 = std::sqrt(cp.GBW / (2 * constants::pi * cp.R_f * dp.C_t));
  dp.p = dp.f0 * (2 * constants::pi * cp.R_f * cp.C_f + 1.0 / cp.GBW);
  dp.n_c = cp.e_n * cp.e_n + 4 * constants::boltzmann * cp.T_e * cp.R_f +
           cp.i_n * cp.i_n * cp.R_f * cp.R_f;
  dp.n_f = 4 * constants::pi * constants::pi * cp.e_n * cp.e_n * cp.R_f * cp.R_f * dp.C_t *
           dp.C_t * dp.f0 * dp.f0;
  dp.R_f = cp.R_f;
  return dp;
}

double electronic_psd(const DerivedParams& dp, double f) {
  const double x2 = (f / dp.f0) * (f / dp.f0);
  return (dp.n_c + dp.n_f * x2) / (1.0 + (dp.p * dp.p - 2.0) * x2 + x2 * x2);
}

std::complex<double> transfer_function(const DerivedParams& dp, double f) {
  const double x = f / dp.f0;
  return dp.R_f / std::complex<double>(1.0 - x * x, dp.p * x);
}

double impulse_response(const DerivedParams& dp, double t) {
  if (t < 0) return 0.0;
  const double w0 = 2 * constants::pi * dp.f0;
  const double p = dp.p;
  if (std::abs(p - 2.0) < critical_damping_tol) {
    return dp.R_f * w0 * w0 * t * std::exp(-w0 * t);
  }
  if (p < 2.0) {
    const double wd = w0 * std::sqrt(1.0 - p * p / 4.0);
    return dp.R_f * w0 * w0 / wd * std::exp(-p * w0 * t / 2.0) * std::sin(wd * t);
  }
  const double alpha = p * w0 / 2.0;
  const double beta = w0 * std::sqrt(p * p / 4.0 - 1.0);
  return dp.R_f * w0 * w0 / (2.0 * beta) *
         (std::exp(-(alpha - beta) * t) - std::exp(-(alpha + beta) * t));
}

double impulse_peak_time(const DerivedParams& dp) {
  const double w0 = 2 * constants::pi * dp.f0;
  const double p = dp.p;
  if (std::abs(p - 2.0) < critical_damping_tol) return 1.0 / w0;
  if (p < 2.0) {
    const double wd = w0 * std::sqrt(1.0 - p * p / 4.0);
    return std::atan2(wd, p * w0 / 2.0) / wd;
  }
  const double alpha = p * w0 / 2.0;
  const double beta = w0 * std::sqrt(p * p / 4.0 - 1.0);
  const double slow = alpha - beta;
  const double fast = alpha + beta;
  return std::log(fast / slow) / (fast - slow);
}

double impulse_decay_rate(const DerivedParams& dp) {
  const double w0 = 2 * constants::pi * dp.f0;
  const double p = dp.p;
  if (p <= 2.0 + critical_damping_tol) return p * w0 / 2.0;
  return p * w0 / 2.0 - w0 * std::sqrt(p * p / 4.0 - 1.0);
}

double lo_photon_number(const LOConfig& lo) {
  lo.validate();
  return lo.P_LO * lo.lambda * lo.T / (constants::planck * constants::speed_of_light);
}

CircuitParams preset(std::string_view name) {
  CircuitParams cp;
  cp.C_a = 2.0e-12;
  cp.GBW = 3.9e9;
  cp.i_n = 2.5e-12;
  cp.e_n = 0.89e-9;
  cp.T_e = 298.15;
  cp.eta_PD = 0.9;
  if (name == "set1") {
    cp.R_f = 3.3e3;
    cp.C_f = 1.0e-12;
    cp.C_p = 4.0e-12;
  } else if (name == "set2") {
    cp.R_f = 1.0e3;
    cp.C_f = 1.5e-12;
    cp.C_p = 5.0e-12;
  } else if (name == "set3") {
    cp.R_f = 1.0e3;
    cp.C_f = 1.0e-12;
    cp.C_p = 8.0e-12;
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "' (expected set1|set2|set3)",
                          "circuit.preset");
  }
  return cp;
}

std::vector<std::string> preset_names() { return {"set1", "set2", "set3"}; }

nlohmann::json to_json(const CircuitParams& cp) {
  return nlohmann::json{{"R_f", cp.R_f},     {"C_f", cp.C_f}, {"C_p", cp.C_p},
                        {"C_a", cp.C_a},     {"GBW", cp.GBW}, {"i_n", cp.i_n},
                        {"e_n", cp.e_n},     {"T_e", cp.T_e}, {"eta_PD", cp.eta_PD}};
}

CircuitParams circuit_from_json(const nlohmann::json& j, const std::string& path) {
  if (j.is_object() && j.contains("preset")) {
    if (!j.at("preset").is_string()) {
      throw ValidationError("must be a string", path + ".preset");
    }
    CircuitParams cp = preset(j.at("preset").get<std::string>());
    // Optional overrides next to the preset name (e.g. a different eta_PD).
    for (auto& [key, val] : j.items()) {
      if (key == "preset") continue;
      if (!val.is_number()) throw ValidationError("must be a number", path + "." + key);
      const double v = val.get<double>();
      if (key == "R_f") cp.R_f = v;
      else if (key == "C_f") cp.C_f = v;
      else if (key == "C_p") cp.C_p = v;
      else if (key == "C_a") cp.C_a = v;
      else if (key == "GBW") cp.GBW = v;
      else if (key == "i_n") cp.i_n = v;
      else if (key == "e_n") cp.e_n = v;
      else if (key == "T_e") cp.T_e = v;
      else if (key == "eta_PD") cp.eta_PD = v;
      else throw ValidationError("unknown field", path + "." + key);
    }
    cp.validate();
    return cp;
  }
  if (!j.is_object()) throw ValidationError("must be an object", path);
  CircuitParams cp;
  auto get = [&](const char* key) {
    if (!j.contains(key)) throw ValidationError("missing field", path + "." + key);
    if (!j.at(key).is_number()) throw ValidationError("must be a number", path + "." + key);
    return j.at(key).get<double>();
  };
  cp.R_f = get("R_f");
  cp.C_f = get("C_f");
  cp.C_p = get("C_p");
  cp.C_a = get("C_a");
  cp.GBW = get("GBW");
  cp.i_n = get("i_n");
  cp.e_n = get("e_n");
  cp.T_e = get("T_e");
  cp.eta_PD = get("eta_PD");
  cp.validate();
  return cp;
}

nlohmann::json to_json(const LOConfig& lo) {
  return nlohmann::json{{"P_LO", lo.P_LO}, {"lambda", lo.lambda}, {"T", lo.T}};
}

LOConfig lo_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError("must be an object", path);
  LOConfig lo;
  auto get = [&](const char* key) {
    if (!j.contains(key)) throw ValidationError("missing field", path + "." + key);
    if (!j.at(key).is_number()) throw ValidationError("must be a number", path + "." + key);
    return j.at(key).get<double>();
  };
  lo.P_LO = get("P_LO");
  lo.lambda = get("lambda");
  lo.T = get("T");
  for (auto& [key, val] : j.items()) {
    (void)val;
    if (key != "P_LO" && key != "lambda" && key != "T") {
      throw ValidationError("unknown field", path + "." + key);
    }
  }
  lo.validate();
  return lo;
}

}  // namespace uhd
