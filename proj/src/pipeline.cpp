#include "uhd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "uhd/constants.hpp"
#include "uhd/errors.hpp"
#include "uhd/kernels.hpp"

namespace uhd {

OutcomeSeries apply_weight(const TraceSet& trace, const WeightVector& w) {
  if (w.values.size() != trace.grid.L) {
    std::ostringstream msg;
    msg << "weight length " << w.values.size() << " does not match the grid's " << trace.grid.L
        << " samples per period";
    throw ValidationError(msg.str());
  }
  OutcomeSeries out;
  out.values = trace.samples.transpose() * w.values;
  out.period = trace.grid.T;
  out.weight = w;
  return out;
}

OutcomeSeries sideband(const OutcomeSeries& series, double f_s, long J_block) {
  if (J_block < 1) throw ValidationError("block length must be >= 1", "sideband.J_block");
  if (!(f_s > 0) || !std::isfinite(f_s)) {
    throw ValidationError("sideband frequency must be strictly positive", "sideband.f_s");
  }
  const long n = series.count();
  if (n < J_block) throw ValidationError("series shorter than one block", "sideband.J_block");

  const double cycles = f_s * series.period * static_cast<double>(J_block);
  const double nearest = std::round(cycles);
  if (std::abs(cycles - nearest) > 1e-9 * std::max(1.0, std::abs(cycles))) {
    std::ostringstream msg;
    msg << "f_s*T*J_block = " << cycles
        << " sine cycles per block is not a whole number; this would leak spectral bias";
    throw ValidationError(msg.str(), "sideband.f_s");
  }
  // Half-integer cycles per period make every sine sample vanish.
  const double per_period = 2.0 * f_s * series.period;
  if (std::abs(per_period - std::round(per_period)) < 1e-9) {
    throw ValidationError("sine weight vanishes at every period (f_s*T is a multiple of 1/2)",
                          "sideband.f_s");
  }

  const long n_blocks = n / J_block;
  OutcomeSeries out;
  out.values.resize(n_blocks);
  for (long b = 0; b < n_blocks; ++b) {
    double acc = 0.0;
    for (long i = 0; i < J_block; ++i) {
      const double j = static_cast<double>(b * J_block + i);
      acc += std::sin(2.0 * constants::pi * f_s * series.period * j) * series.values[b * J_block + i];
    }
    out.values[b] = acc;
  }
  out.period = series.period * static_cast<double>(J_block);
  out.weight = series.weight;
  return out;
}

OutcomeSeries normalize(const OutcomeSeries& series, const OutcomeSeries& vacuum) {
  const MomentStats vs = stats(vacuum);
  if (!(vs.variance > 0)) {
    throw ValidationError("vacuum series has zero variance; cannot normalize");
  }
  OutcomeSeries out = series;
  out.values /= std::sqrt(vs.variance);
  out.normalized = true;
  out.vacuum_variance = vs.variance;
  return out;
}

MomentStats stats(const Eigen::VectorXd& values) {
  const long n = values.size();
  if (n < 4) throw ValidationError("statistics need at least 4 values", "stats.count");
  MomentStats s;
  s.n = n;
  s.mean = values.mean();
  const Eigen::ArrayXd d = values.array() - s.mean;
  const double m2 = d.square().mean();
  if (!(m2 > 0)) throw ValidationError("degenerate series: zero variance", "stats.variance");
  const double m3 = d.cube().mean();
  const double m4 = d.square().square().mean();
  s.variance = d.square().sum() / static_cast<double>(n - 1);
  s.skewness = m3 / std::pow(m2, 1.5);
  s.ex_kurtosis = m4 / (m2 * m2) - 3.0;
  return s;
}

MomentStats stats(const OutcomeSeries& series) { return stats(series.values); }

double corr_d(const Eigen::VectorXd& values, long d) {
  if (d < 1) throw ValidationError("lag must be >= 1", "corr.d");
  const long n = values.size();
  if (n <= d + 1) throw ValidationError("series too short for this lag", "corr.d");
  const long m = n - d;
  const Eigen::VectorXd x = values.head(m);
  const Eigen::VectorXd y = values.tail(m);
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double den = std::sqrt(dx.square().sum() * dy.square().sum());
  if (!(den > 0)) throw ValidationError("degenerate series: zero variance", "corr.variance");
  return (dx * dy).sum() / den;
}

double corr_d(const OutcomeSeries& series, long d) { return corr_d(series.values, d); }

double fdist_ci_half_db(long n1, long n2) {
  if (n1 < 2 || n2 < 2) throw ValidationError("confidence interval needs >= 2 samples per series");
  const double d1 = static_cast<double>(n1 - 1);
  const double d2 = static_cast<double>(n2 - 1);
  // log F is asymptotically normal with variance 2/d1 + 2/d2; 97.5th normal
  // percentile gives the two-sided 95% band.
  constexpr double z975 = 1.959963984540054;
  return 10.0 / std::log(10.0) * z975 * std::sqrt(2.0 / d1 + 2.0 / d2);
}

SqueezingLevels squeezing_levels(const OutcomeSeries& sq, const OutcomeSeries& asq,
                                 const OutcomeSeries& vac) {
  if (sq.weight.values.size() > 0 && vac.weight.values.size() > 0) {
    if (sq.weight.values.size() != vac.weight.values.size() ||
        asq.weight.values.size() != vac.weight.values.size() ||
        (sq.weight.values - vac.weight.values).cwiseAbs().maxCoeff() > 1e-12 ||
        (asq.weight.values - vac.weight.values).cwiseAbs().maxCoeff() > 1e-12) {
      throw ValidationError("squeezing levels require all series from the same weight");
    }
  }
  const MomentStats ms_sq = stats(sq);
  const MomentStats ms_asq = stats(asq);
  const MomentStats ms_vac = stats(vac);
  if (!(ms_vac.variance > 0)) {
    throw ValidationError("vacuum series has zero variance; cannot form ratios");
  }
  SqueezingLevels lv;
  lv.S_sq = ms_sq.variance / ms_vac.variance;
  lv.S_asq = ms_asq.variance / ms_vac.variance;
  lv.sq_db = db_from_linear(lv.S_sq);
  lv.asq_db = db_from_linear(lv.S_asq);
  lv.ci_half_db_sq = fdist_ci_half_db(ms_sq.n, ms_vac.n);
  lv.ci_half_db_asq = fdist_ci_half_db(ms_asq.n, ms_vac.n);
  return lv;
}

EtaR infer_eta_r(double S_sq, double S_asq) {
  if (!(S_sq < 1.0)) {
    throw ValidationError("squeezed level must be below the vacuum unit (not squeezed)",
                          "levels.S_sq");
  }
  if (!(S_sq > 0)) throw ValidationError("squeezed level must be positive", "levels.S_sq");
  if (!(S_sq + S_asq > 2.0)) {
    throw ValidationError(
        "S_sq + S_asq <= 2 is degenerate (r -> 0 limit; efficiency unidentifiable)", "levels");
  }
  EtaR out;
  out.eta = (1.0 - S_sq) * (S_asq - 1.0) / (S_sq + S_asq - 2.0);
  if (out.eta > 1.0 + 1e-9) {
    std::ostringstream msg;
    msg << "levels imply efficiency " << out.eta << " > 1; inputs are inconsistent";
    throw ValidationError(msg.str(), "levels");
  }
  out.eta = std::min(out.eta, 1.0);
  out.r = 0.25 * std::log((S_asq - 1.0 + out.eta) / (S_sq - 1.0 + out.eta));
  return out;
}

SqueezingLevels forward_levels(double eta, double r) {
  if (!(eta > 0 && eta <= 1)) throw ValidationError("efficiency must be in (0, 1]", "levels.eta");
  if (!(r >= 0) || !std::isfinite(r)) {
    throw ValidationError("squeezing parameter must be >= 0", "levels.r");
  }
  SqueezingLevels lv;
  lv.S_sq = (1.0 - eta) + eta * std::exp(-2.0 * r);
  lv.S_asq = (1.0 - eta) + eta * std::exp(2.0 * r);
  lv.sq_db = db_from_linear(lv.S_sq);
  lv.asq_db = db_from_linear(lv.S_asq);
  return lv;
}

PredictedLevels predict_improved(double S_sq, double S_asq, double snr_old, double snr_new) {
  if (!(snr_old >= 1.0) || !(snr_new >= snr_old)) {
    throw ValidationError("prediction requires snr_new >= snr_old >= 1 (linear)", "predict.snr");
  }
  const EtaR base = infer_eta_r(S_sq, S_asq);
  const double eff_old = efficiency_from_snr(snr_old);
  const double eff_new = efficiency_from_snr(snr_new);
  if (!(eff_old > 0)) {
    throw ValidationError("baseline snr must exceed 1 for a finite improvement factor",
                          "predict.snr_old");
  }
  PredictedLevels out;
  out.zeta = eff_new / eff_old;
  out.eta_new = out.zeta * base.eta;
  if (out.eta_new > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "improvement factor " << out.zeta << " would push efficiency to " << out.eta_new
        << " > 1; inputs are inconsistent";
    throw ValidationError(msg.str(), "predict");
  }
  out.eta_new = std::min(out.eta_new, 1.0);
  const SqueezingLevels lv = forward_levels(out.eta_new, base.r);
  out.S_sq = lv.S_sq;
  out.S_asq = lv.S_asq;
  return out;
}

namespace {

double total_efficiency(double eta0, double snr) { return efficiency_from_snr(snr) * eta0; }

void check_enhancement_domain(double eta0, double snr1, double snr2) {
  if (!(eta0 > 0 && eta0 <= 1)) {
    throw ValidationError("residual efficiency must be in (0, 1]", "enhance.eta0");
  }
  if (!(snr1 >= 1.0) || !(snr2 >= snr1)) {
    throw ValidationError("enhancement requires snr2 >= snr1 >= 1 (linear)", "enhance.snr");
  }
}

}  // namespace

double squeezing_enhancement(double r, double eta0, double snr1, double snr2) {
  if (!(r >= 0) || !std::isfinite(r)) {
    throw ValidationError("squeezing parameter must be >= 0", "enhance.r");
  }
  check_enhancement_domain(eta0, snr1, snr2);
  auto level = [&](double snr) {
    const double eta = total_efficiency(eta0, snr);
    return (1.0 - eta) + eta * std::exp(-2.0 * r);
  };
  return 10.0 * std::log10(level(snr1) / level(snr2));
}

double wigner_negativity(double eta_total) {
  if (!(eta_total >= 0 && eta_total <= 1)) {
    throw ValidationError("total efficiency must be in [0, 1]", "wigner.eta");
  }
  return 1.0 - 2.0 * eta_total;
}

double wigner_enhancement(double eta0, double snr1, double snr2) {
  check_enhancement_domain(eta0, snr1, snr2);
  return wigner_negativity(total_efficiency(eta0, snr2)) -
         wigner_negativity(total_efficiency(eta0, snr1));
}

SqueezingReport make_report(const OutcomeSeries& sq, const OutcomeSeries& asq,
                            const OutcomeSeries& vac, double snr_used, double snr_new) {
  SqueezingReport rep;
  rep.levels = squeezing_levels(sq, asq, vac);
  rep.n_sq = sq.count();
  rep.n_asq = asq.count();
  rep.n_vac = vac.count();
  rep.snr_used = snr_used;
  const EtaR er = infer_eta_r(rep.levels.S_sq, rep.levels.S_asq);
  rep.eta = er.eta;
  rep.r = er.r;
  if (snr_new > 0) {
    rep.has_prediction = true;
    rep.snr_new = snr_new;
    rep.predicted = predict_improved(rep.levels.S_sq, rep.levels.S_asq, snr_used, snr_new);
  }
  return rep;
}

nlohmann::json to_json(const SqueezingReport& rep) {
  nlohmann::json j{{"S_sq", rep.levels.S_sq},
                   {"S_asq", rep.levels.S_asq},
                   {"S_sq_db", rep.levels.sq_db},
                   {"S_asq_db", rep.levels.asq_db},
                   {"ci_half_db_sq", rep.levels.ci_half_db_sq},
                   {"ci_half_db_asq", rep.levels.ci_half_db_asq},
                   {"eta", rep.eta},
                   {"r", rep.r},
                   {"snr_used", rep.snr_used},
                   {"counts", {{"sq", rep.n_sq}, {"asq", rep.n_asq}, {"vac", rep.n_vac}}}};
  if (rep.has_prediction) {
    j["predicted"] = {{"snr_new", rep.snr_new},
                      {"zeta", rep.predicted.zeta},
                      {"eta_new", rep.predicted.eta_new},
                      {"S_sq", rep.predicted.S_sq},
                      {"S_asq", rep.predicted.S_asq},
                      {"S_sq_db", db_from_linear(rep.predicted.S_sq)},
                      {"S_asq_db", db_from_linear(rep.predicted.S_asq)}};
  }
  return j;
}

std::string format_table(const SqueezingReport& rep) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "squeezing analysis\n";
  os << "  squeezed level      " << std::setw(8) << rep.levels.sq_db << " dB  (+/- "
     << rep.levels.ci_half_db_sq << " dB, 95%)\n";
  os << "  antisqueezed level  " << std::setw(8) << rep.levels.asq_db << " dB  (+/- "
     << rep.levels.ci_half_db_asq << " dB, 95%)\n";
  os << "  efficiency eta      " << std::setw(8) << rep.eta << "\n";
  os << "  squeezing r         " << std::setw(8) << rep.r << "\n";
  os << "  weight SNR          " << std::setw(8) << db_from_linear(rep.snr_used) << " dB\n";
  os << "  outcomes (sq/asq/vac)  " << rep.n_sq << "/" << rep.n_asq << "/" << rep.n_vac << "\n";
  if (rep.has_prediction) {
    os << "  prediction at SNR   " << std::setw(8) << db_from_linear(rep.snr_new) << " dB:\n";
    os << "    zeta              " << std::setw(8) << rep.predicted.zeta << "\n";
    os << "    squeezed level    " << std::setw(8) << db_from_linear(rep.predicted.S_sq) << " dB\n";
    os << "    antisqueezed lvl  " << std::setw(8) << db_from_linear(rep.predicted.S_asq)
       << " dB\n";
  }
  return os.str();
}

Histogram histogram(const Eigen::VectorXd& values, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least 1 bin", "histogram.bins");
  if (values.size() < 1) throw ValidationError("histogram needs data", "histogram.values");
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double width = (hi > lo) ? (hi - lo) / bins : 1.0;
  Histogram h;
  h.centers.resize(bins);
  h.heights = Eigen::VectorXd::Zero(bins);
  for (int b = 0; b < bins; ++b) h.centers[b] = lo + (b + 0.5) * width;
  for (long i = 0; i < values.size(); ++i) {
    int b = static_cast<int>((values[i] - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    h.heights[b] += 1.0;
  }
  const double peak = h.heights.maxCoeff();
  if (peak > 0) h.heights /= peak;
  return h;
}

}  // namespace uhd
