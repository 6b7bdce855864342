#pragma once

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "uhd/optimizer.hpp"
#include "uhd/synth.hpp"

namespace uhd {

// Per-window weighted outcomes V^(j) = sum_l w_l v_j[l], or block sideband
// quadratures derived from them.
struct OutcomeSeries {
  Eigen::VectorXd values;      // V (raw) or dimensionless (normalized)
  double period = 0;           // time spacing of consecutive values (s)
  WeightVector weight;         // the weight that produced the series
  bool normalized = false;
  double vacuum_variance = 0;  // the normalizing variance when normalized

  long count() const { return values.size(); }
};

OutcomeSeries apply_weight(const TraceSet& trace, const WeightVector& w);

// One sideband quadrature per disjoint block of J_block outcomes:
//   Phi_b = sum_i sin(2*pi*f_s*(b*J_block + i)*T) * V_(b*J_block+i).
// f_s*T*J_block must be a whole number of sine cycles (and not degenerate),
// so every block carries the same phase pattern and no spectral leakage
// enters. Trailing outcomes that do not fill a block are dropped.
OutcomeSeries sideband(const OutcomeSeries& series, double f_s, long J_block);

// Divides by the vacuum series' sample standard deviation and records the
// variance, making the vacuum variance the unit.
OutcomeSeries normalize(const OutcomeSeries& series, const OutcomeSeries& vacuum);

struct MomentStats {
  long n = 0;
  double mean = 0;
  double variance = 0;     // unbiased (n-1)
  double skewness = 0;     // m3 / m2^1.5
  double ex_kurtosis = 0;  // m4 / m2^2 - 3
};

MomentStats stats(const Eigen::VectorXd& values);
MomentStats stats(const OutcomeSeries& series);

// Sample Pearson correlation between outcomes d periods apart.
double corr_d(const Eigen::VectorXd& values, long d);
double corr_d(const OutcomeSeries& series, long d);

struct SqueezingLevels {
  double S_sq = 0;   // Var(squeezed)/Var(vacuum), linear
  double S_asq = 0;  // Var(antisqueezed)/Var(vacuum), linear
  double sq_db = 0;
  double asq_db = 0;
  double ci_half_db_sq = 0;   // 95% F-distribution half-width (dB)
  double ci_half_db_asq = 0;
};

// 95% confidence half-width (dB) of a variance ratio estimated from n1- and
// n2-sample variances, via the normal approximation of log F.
double fdist_ci_half_db(long n1, long n2);

SqueezingLevels squeezing_levels(const OutcomeSeries& sq, const OutcomeSeries& asq,
                                 const OutcomeSeries& vac);

struct EtaR {
  double eta = 0;
  double r = 0;
};

// Closed-form inversion of S_sq = (1-eta) + eta*exp(-2r),
// S_asq = (1-eta) + eta*exp(+2r).
EtaR infer_eta_r(double S_sq, double S_asq);

// The forward equations (no confidence interval attached).
SqueezingLevels forward_levels(double eta, double r);

struct PredictedLevels {
  double S_sq = 0;
  double S_asq = 0;
  double zeta = 0;     // detection-efficiency improvement factor
  double eta_new = 0;  // zeta * inferred eta
};

// Re-evaluates the squeezing levels after the detection efficiency improves
// from eta_e(snr_old) to eta_e(snr_new).
PredictedLevels predict_improved(double S_sq, double S_asq, double snr_old, double snr_new);

// dB gain of the observable squeezing level when the detection SNR improves
// from snr1 to snr2 (both linear), for a state of squeezing r prepared with
// efficiency eta0: 10*log10(S_sq(eta_e(snr1)*eta0) / S_sq(eta_e(snr2)*eta0)).
double squeezing_enhancement(double r, double eta0, double snr1, double snr2);

// 2*pi*W(0,0) of a single photon detected with total efficiency eta_total:
// 1 - 2*eta_total (negative above 50% efficiency).
double wigner_negativity(double eta_total);

// Change of 2*pi*W(0,0) when the SNR improves from snr1 to snr2 at residual
// efficiency eta0 (negative = deeper negativity).
double wigner_enhancement(double eta0, double snr1, double snr2);

struct SqueezingReport {
  SqueezingLevels levels;
  double eta = 0;
  double r = 0;
  double snr_used = 0;  // linear SNR of the analysis weight
  long n_sq = 0;
  long n_asq = 0;
  long n_vac = 0;
  bool has_prediction = false;
  double snr_new = 0;  // linear
  PredictedLevels predicted;
};

// Levels + inversion (+ optional prediction at snr_new > 0) in one pass.
SqueezingReport make_report(const OutcomeSeries& sq, const OutcomeSeries& asq,
                            const OutcomeSeries& vac, double snr_used, double snr_new = 0);

nlohmann::json to_json(const SqueezingReport& report);
std::string format_table(const SqueezingReport& report);

// Peak-normalized histogram (max height 1) for distribution plots.
struct Histogram {
  Eigen::VectorXd centers;
  Eigen::VectorXd heights;
};

Histogram histogram(const Eigen::VectorXd& values, int bins);

}  // namespace uhd
