#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uhd/circuit.hpp"
#include "uhd/errors.hpp"
#include "uhd/estimator.hpp"
#include "uhd/io.hpp"
#include "uhd/kernels.hpp"
#include "uhd/optimizer.hpp"
#include "uhd/pipeline.hpp"
#include "uhd/resampler.hpp"
#include "uhd/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw uhd::IoError("cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw uhd::IoError(path + ": invalid JSON: " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw uhd::IoError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw uhd::IoError("failed writing to " + path);
}

void write_json_out(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

// Run manifest: resolved parameters plus digests of every file read and
// written, so any output can be replayed from scratch. Deliberately carries
// no timestamps: reruns must be byte-identical.
void write_manifest(const std::string& out_dir, const std::string& command, const json& params,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json manifest{{"format_version", 1}, {"command", command}, {"parameters", params}};
  json in = json::object();
  for (const auto& p : inputs) in[p] = uhd::digest_hex(uhd::fnv1a_digest(p));
  json out = json::object();
  for (const auto& p : outputs) out[p] = uhd::digest_hex(uhd::fnv1a_digest(p));
  manifest["inputs"] = in;
  manifest["outputs"] = out;
  write_json_out(out_dir + "/" + command + "-manifest.json", manifest);
}

uhd::SamplingGrid grid_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw uhd::ValidationError("must be an object", path);
  uhd::SamplingGrid grid;
  if (!j.contains("L") || !j.at("L").is_number_integer()) {
    throw uhd::ValidationError("must be an integer", path + ".L");
  }
  grid.L = j.at("L").get<int>();
  if (!j.contains("T") || !j.at("T").is_number()) {
    throw uhd::ValidationError("must be a number", path + ".T");
  }
  grid.T = j.at("T").get<double>();
  grid.validate();
  return grid;
}

json default_config(const std::string& preset_name) {
  return json{{"circuit", {{"preset", preset_name}}},
              {"lo", {{"P_LO", 2.7e-3}, {"lambda", 8.0e-7}, {"T", 1.25e-8}}},
              {"grid", {{"L", 125}, {"T", 1.25e-8}}},
              {"state", {{"kind", "vacuum"}}},
              {"J", 1000},
              {"drift", 0.0},
              {"crosstalk", false},
              {"seed", 1}};
}

struct SimulateArgs {
  std::string config_path;
  std::string preset_name;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> drift;
};

int cmd_simulate(const SimulateArgs& args) {
  json cfg;
  if (!args.config_path.empty()) {
    cfg = read_json_file(args.config_path);
    if (!cfg.is_object()) throw uhd::ValidationError("must be a JSON object", "config");
  } else if (!args.preset_name.empty()) {
    cfg = default_config(args.preset_name);
  } else {
    throw uhd::ValidationError("simulate needs --config or --preset", "config");
  }

  for (auto& [key, val] : cfg.items()) {
    (void)val;
    static const char* known[] = {"circuit", "lo", "grid", "state", "J",
                                  "drift",   "crosstalk", "seed", "band"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw uhd::ValidationError("unknown field", "config." + key);
  }
  if (!cfg.contains("circuit")) throw uhd::ValidationError("missing field", "config.circuit");
  if (!cfg.contains("lo")) throw uhd::ValidationError("missing field", "config.lo");
  if (!cfg.contains("grid")) throw uhd::ValidationError("missing field", "config.grid");

  const uhd::CircuitParams cp = uhd::circuit_from_json(cfg.at("circuit"), "circuit");
  const uhd::LOConfig lo = uhd::lo_from_json(cfg.at("lo"), "lo");
  const uhd::SamplingGrid grid = grid_from_json(cfg.at("grid"), "grid");
  const uhd::StateSpec state =
      cfg.contains("state") ? uhd::state_from_json(cfg.at("state"), "state") : uhd::StateSpec::vacuum();

  if (!cfg.contains("J") || !cfg.at("J").is_number_integer()) {
    throw uhd::ValidationError("must be an integer", "config.J");
  }
  const long J = cfg.at("J").get<long>();
  if (J < 1 || J > 100000000L) throw uhd::ValidationError("must be in [1, 1e8]", "config.J");

  double drift = 0.0;
  if (cfg.contains("drift")) {
    if (!cfg.at("drift").is_number()) throw uhd::ValidationError("must be a number", "config.drift");
    drift = cfg.at("drift").get<double>();
  }
  if (args.drift) drift = *args.drift;

  uhd::SynthOptions opts;
  if (cfg.contains("crosstalk")) {
    if (!cfg.at("crosstalk").is_boolean()) {
      throw uhd::ValidationError("must be a boolean", "config.crosstalk");
    }
    opts.crosstalk = cfg.at("crosstalk").get<bool>();
  }
  if (cfg.contains("band")) {
    const json& band = cfg.at("band");
    if (!band.is_object()) throw uhd::ValidationError("must be an object", "config.band");
    if (band.contains("f_max_over_f0")) opts.band.f_max_over_f0 = band.at("f_max_over_f0").get<double>();
    if (band.contains("df_over_f0")) opts.band.df_over_f0 = band.at("df_over_f0").get<double>();
    if (band.contains("taper_fraction")) opts.band.taper_fraction = band.at("taper_fraction").get<double>();
    opts.band.validate();
  }

  std::uint64_t seed = 1;
  if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_unsigned() && !cfg.at("seed").is_number_integer()) {
      throw uhd::ValidationError("must be a non-negative integer", "config.seed");
    }
    seed = cfg.at("seed").get<std::uint64_t>();
  }
  if (args.seed) seed = *args.seed;

  fs::create_directories(args.out_dir);
  const uhd::TraceSet trace = uhd::synth_trace(cp, grid, lo, state, drift, seed, J, opts);
  const std::string trace_path = args.out_dir + "/trace.uhdt";
  uhd::write_trace(trace, trace_path);

  json resolved = cfg;
  resolved["seed"] = seed;
  resolved["drift"] = drift;
  resolved["circuit"] = uhd::to_json(cp);
  std::vector<std::string> inputs;
  if (!args.config_path.empty()) inputs.push_back(args.config_path);
  write_manifest(args.out_dir, "simulate", resolved, inputs,
                 {trace_path, trace_path + ".json"});

  std::cout << "wrote " << trace_path << " (" << J << " windows x " << grid.L << " samples, seed "
            << seed << ")\n";
  return 0;
}

struct EstimateArgs {
  std::string trace_path;
  std::string dark_path;
  std::string role = "auto";
  std::string out_dir = ".";
  std::string format = "bin";
};

uhd::KernelRole resolve_role(const std::string& requested, const uhd::TraceSet& trace) {
  if (requested == "electronic") return uhd::KernelRole::Electronic;
  if (requested == "shot") return uhd::KernelRole::Shot;
  if (requested != "auto") {
    throw uhd::ValidationError("role must be auto|electronic|shot", "estimate.role");
  }
  if (trace.truth.is_object() && trace.truth.contains("lo") &&
      trace.truth.at("lo").contains("P_LO")) {
    return trace.truth.at("lo").at("P_LO").get<double>() == 0.0 ? uhd::KernelRole::Electronic
                                                                : uhd::KernelRole::Shot;
  }
  throw uhd::ValidationError(
      "trace sidecar does not record the LO power; pass --role electronic or --role shot",
      "estimate.role");
}

int cmd_estimate(const EstimateArgs& args) {
  fs::create_directories(args.out_dir);
  const uhd::TraceSet raw = uhd::read_trace(args.trace_path);
  const uhd::TraceSet corrected = uhd::offset_correct(raw);
  std::vector<std::string> inputs{args.trace_path};
  std::vector<std::string> outputs;

  auto emit = [&](const uhd::KernelMatrix& k, const std::string& name) {
    const std::string path = args.out_dir + "/" + name + ".uhdk";
    uhd::write_kernel(k, path);
    outputs.push_back(path);
    outputs.push_back(path + ".json");
    if (args.format == "csv") {
      uhd::write_kernel_csv(k, args.out_dir + "/" + name + ".csv");
      outputs.push_back(args.out_dir + "/" + name + ".csv");
    }
    if (!k.warning.empty()) std::cerr << "warning: " << k.warning << "\n";
    std::cout << "wrote " << path << " (role " << uhd::role_name(k.role) << ", "
              << k.provenance.n_windows << " windows)\n";
  };

  if (args.dark_path.empty()) {
    const uhd::KernelRole role = resolve_role(args.role, raw);
    emit(uhd::estimate_kernel(corrected, role), uhd::role_name(role));
  } else {
    inputs.push_back(args.dark_path);
    const uhd::TraceSet dark = uhd::offset_correct(uhd::read_trace(args.dark_path));
    const uhd::KernelMatrix shot = uhd::estimate_kernel(corrected, uhd::KernelRole::Shot);
    const uhd::KernelMatrix electronic = uhd::estimate_kernel(dark, uhd::KernelRole::Electronic);
    const uhd::KernelMatrix response = uhd::subtract(shot, electronic);
    emit(shot, "shot");
    emit(electronic, "electronic");
    emit(response, "response");
  }

  write_manifest(args.out_dir, "estimate",
                 json{{"trace", args.trace_path},
                      {"dark", args.dark_path},
                      {"role", args.role},
                      {"format", args.format}},
                 inputs, outputs);
  return 0;
}

struct OptimizeArgs {
  std::string shot_path;
  std::string electronic_path;
  std::string method = "optimal";
  int harmonics = -1;
  std::string sweep;
  std::string preset_name;
  double peak_width = 0;
  std::string out_dir = ".";
};

int cmd_optimize(const OptimizeArgs& args) {
  fs::create_directories(args.out_dir);
  const uhd::KernelMatrix shot = uhd::read_kernel(args.shot_path);
  const uhd::KernelMatrix electronic = uhd::read_kernel(args.electronic_path);
  std::vector<std::string> inputs{args.shot_path, args.electronic_path};
  std::vector<std::string> outputs;

  if (!args.sweep.empty()) {
    const auto dots = args.sweep.find("..");
    if (dots == std::string::npos) {
      throw uhd::ValidationError("sweep range must look like a..b", "optimize.sweep");
    }
    int n_min = 0, n_max = 0;
    try {
      n_min = std::stoi(args.sweep.substr(0, dots));
      n_max = std::stoi(args.sweep.substr(dots + 2));
    } catch (const std::exception&) {
      throw uhd::ValidationError("sweep bounds must be integers", "optimize.sweep");
    }
    const auto points = uhd::snr_vs_cutoff(shot, electronic, n_min, n_max);
    std::string csv = "N,f_c_hz,snr,snr_db\n";
    for (const auto& p : points) {
      csv += std::to_string(p.N) + "," + uhd::format_double(p.f_c) + "," +
             uhd::format_double(p.snr) + "," + uhd::format_double(uhd::db_from_linear(p.snr)) +
             "\n";
    }
    const std::string path = args.out_dir + "/sweep.csv";
    write_text_file(path, csv);
    outputs.push_back(path);
    std::cout << "wrote " << path << " (" << points.size() << " points)\n";
  } else {
    uhd::WeightVector w;
    if (args.method == "optimal") {
      if (args.harmonics < 0) {
        throw uhd::ValidationError("optimal method needs --harmonics", "optimize.harmonics");
      }
      w = uhd::optimize_weight(shot, electronic, args.harmonics);
    } else if (args.method == "constant") {
      w = uhd::constant_weight(shot.grid);
      w.achieved_snr = uhd::snr_of_weight(w.values, shot, electronic);
    } else if (args.method == "peak") {
      if (args.preset_name.empty()) {
        throw uhd::ValidationError("peak method needs --preset for the response model",
                                   "optimize.preset");
      }
      if (!(args.peak_width > 0)) {
        throw uhd::ValidationError("peak method needs --peak-width in seconds",
                                   "optimize.peak_width");
      }
      const uhd::DerivedParams dp = uhd::derive_params(uhd::preset(args.preset_name));
      w = uhd::peak_weight(dp, shot.grid, args.peak_width);
      w.achieved_snr = uhd::snr_of_weight(w.values, shot, electronic);
    } else {
      throw uhd::ValidationError("method must be optimal|constant|peak", "optimize.method");
    }
    const std::string path = args.out_dir + "/weight.csv";
    uhd::write_weight(w, path);
    outputs.push_back(path);
    outputs.push_back(path + ".json");
    std::cout << "wrote " << path << " (method " << w.method << ", snr "
              << uhd::format_double(uhd::db_from_linear(w.achieved_snr)) << " dB)\n";
  }

  write_manifest(args.out_dir, "optimize",
                 json{{"shot", args.shot_path},
                      {"electronic", args.electronic_path},
                      {"method", args.method},
                      {"harmonics", args.harmonics},
                      {"sweep", args.sweep},
                      {"preset", args.preset_name},
                      {"peak_width", args.peak_width}},
                 inputs, outputs);
  return 0;
}

struct AnalyzeArgs {
  std::string vacuum_path;
  std::string squeezed_path;
  std::string antisqueezed_path;
  std::string weight_path;
  double f_s = 0;
  long block = 0;
  double predict_snr_db = 0;
  std::optional<double> drift;
  bool auto_drift = false;
  std::string out_dir = ".";
};

int cmd_analyze(const AnalyzeArgs& args) {
  fs::create_directories(args.out_dir);
  uhd::TraceSet vac = uhd::read_trace(args.vacuum_path);
  uhd::TraceSet sq = uhd::read_trace(args.squeezed_path);
  uhd::TraceSet asq = uhd::read_trace(args.antisqueezed_path);
  const uhd::WeightVector w = uhd::read_weight(args.weight_path);

  double drift = 0.0;
  if (args.auto_drift) {
    drift = uhd::estimate_drift(vac);
    std::cout << "estimated drift: " << uhd::format_double(drift) << " s/period\n";
  } else if (args.drift) {
    drift = *args.drift;
  }
  if (drift != 0.0) {
    const uhd::ResampleConfig cfg;
    vac = uhd::align(vac, drift, cfg);
    sq = uhd::align(sq, drift, cfg);
    asq = uhd::align(asq, drift, cfg);
  }

  const auto outcomes = [&](const uhd::TraceSet& t) {
    return uhd::sideband(uhd::apply_weight(uhd::offset_correct(t), w), args.f_s, args.block);
  };
  const uhd::OutcomeSeries phi_vac = outcomes(vac);
  const uhd::OutcomeSeries phi_sq = outcomes(sq);
  const uhd::OutcomeSeries phi_asq = outcomes(asq);

  if (!std::isfinite(w.achieved_snr)) {
    throw uhd::ValidationError(
        "weight sidecar has no achieved_snr; optimize against kernels first", "analyze.weight");
  }
  const double snr_new =
      args.predict_snr_db > 0 ? uhd::linear_from_db(args.predict_snr_db) : 0.0;
  const uhd::SqueezingReport report =
      uhd::make_report(phi_sq, phi_asq, phi_vac, w.achieved_snr, snr_new);

  const std::string json_path = args.out_dir + "/report.json";
  const std::string text_path = args.out_dir + "/report.txt";
  write_json_out(json_path, uhd::to_json(report));
  const std::string table = uhd::format_table(report);
  write_text_file(text_path, table);
  std::cout << table;

  std::vector<std::string> outputs{json_path, text_path};
  const auto emit_hist = [&](const uhd::OutcomeSeries& s, const std::string& name) {
    const uhd::OutcomeSeries normalized = uhd::normalize(s, phi_vac);
    const uhd::Histogram h = uhd::histogram(normalized.values, 81);
    std::string csv = "center,height\n";
    for (long i = 0; i < h.centers.size(); ++i) {
      csv += uhd::format_double(h.centers[i]) + "," + uhd::format_double(h.heights[i]) + "\n";
    }
    const std::string path = args.out_dir + "/hist_" + name + ".csv";
    write_text_file(path, csv);
    outputs.push_back(path);
  };
  emit_hist(phi_vac, "vacuum");
  emit_hist(phi_sq, "squeezed");
  emit_hist(phi_asq, "antisqueezed");

  write_manifest(args.out_dir, "analyze",
                 json{{"vacuum", args.vacuum_path},
                      {"squeezed", args.squeezed_path},
                      {"antisqueezed", args.antisqueezed_path},
                      {"weight", args.weight_path},
                      {"f_s", args.f_s},
                      {"block", args.block},
                      {"drift", drift},
                      {"predict_snr_db", args.predict_snr_db}},
                 {args.vacuum_path, args.squeezed_path, args.antisqueezed_path, args.weight_path},
                 outputs);
  return 0;
}

struct ReproduceRow {
  std::string name;
  double computed = 0;
  double reference = 0;
  double tolerance = 0;
};

int print_rows(const std::string& title, const std::vector<ReproduceRow>& rows) {
  std::cout << title << "\n";
  int failures = 0;
  for (const auto& row : rows) {
    const double delta = row.computed - row.reference;
    const bool ok = std::abs(delta) <= row.tolerance;
    if (!ok) ++failures;
    std::printf("  %-34s computed %10.4f  reference %10.4f  delta %+8.4f  %s\n", row.name.c_str(),
                row.computed, row.reference, delta, ok ? "PASS" : "FAIL");
  }
  return failures;
}

int cmd_reproduce(const std::string& target) {
  const uhd::LOConfig lo{2.7e-3, 8.0e-7, 1.25e-8};
  const uhd::SamplingGrid grid{125, 1.25e-8};

  if (target == "table-s1") {
    std::vector<ReproduceRow> rows;
    const double f0_ref[] = {130.8, 214.4, 180.7};
    const double p_ref[] = {2.74, 2.08, 1.18};
    const char* names[] = {"set1", "set2", "set3"};
    for (int i = 0; i < 3; ++i) {
      const uhd::DerivedParams dp = uhd::derive_params(uhd::preset(names[i]));
      rows.push_back({std::string(names[i]) + " f0 (MHz)", dp.f0 / 1e6, f0_ref[i],
                      0.005 * f0_ref[i]});
      rows.push_back({std::string(names[i]) + " damping p", dp.p, p_ref[i], 0.005 * p_ref[i]});
    }
    return print_rows("characteristic frequency and damping vs published values", rows) ? 1 : 0;
  }

  if (target == "appendix-snr") {
    const double ref[3][3] = {{13.8, 16.6, 16.9}, {9.9, 13.9, 14.3}, {8.3, 12.4, 12.7}};
    const char* names[] = {"set1", "set2", "set3"};
    std::vector<ReproduceRow> rows;
    for (int i = 0; i < 3; ++i) {
      const uhd::CircuitParams cp = uhd::preset(names[i]);
      const uhd::DerivedParams dp = uhd::derive_params(cp);
      const uhd::KernelMatrix e = uhd::build_E(dp, grid);
      const uhd::KernelMatrix r = uhd::build_R(dp, grid, lo, cp.eta_PD);
      const uhd::KernelMatrix s = uhd::add(e, r);
      const uhd::WeightVector wc = uhd::constant_weight(grid);
      const double snr_const = uhd::db_from_linear(uhd::snr_of_weight(wc.values, s, e));
      const double snr_240 = uhd::db_from_linear(uhd::optimize_weight(s, e, 3).achieved_snr);
      const double snr_560 = uhd::db_from_linear(uhd::optimize_weight(s, e, 7).achieved_snr);
      rows.push_back({std::string(names[i]) + " constant (dB)", snr_const, ref[i][0], 0.3});
      rows.push_back({std::string(names[i]) + " 240 MHz optimum (dB)", snr_240, ref[i][1], 0.3});
      rows.push_back({std::string(names[i]) + " 560 MHz optimum (dB)", snr_560, ref[i][2], 0.3});
    }
    return print_rows("weighted-readout SNR vs published values", rows) ? 1 : 0;
  }

  if (target == "fig2") {
    const double snr1 = uhd::linear_from_db(13.0);
    const double snr2 = uhd::linear_from_db(18.0);
    std::vector<ReproduceRow> rows;
    const double r_list[] = {0.5, 1.0, 2.7};
    const double ref_a[] = {0.23, 0.68, 2.46};
    for (int i = 0; i < 3; ++i) {
      rows.push_back({"r=" + uhd::format_double(r_list[i]) + " eta0=0.976 (dB)",
                      uhd::squeezing_enhancement(r_list[i], 0.976, snr1, snr2), ref_a[i], 0.01});
    }
    const double eta0_list[] = {0.7, 0.9, 0.976};
    const double ref_b[] = {0.32, 1.00, 2.46};
    for (int i = 0; i < 3; ++i) {
      rows.push_back({"eta0=" + uhd::format_double(eta0_list[i]) + " r=2.7 (dB)",
                      uhd::squeezing_enhancement(2.7, eta0_list[i], snr1, snr2), ref_b[i], 0.01});
    }
    return print_rows("squeezing enhancement vs published values", rows) ? 1 : 0;
  }

  throw uhd::ValidationError("target must be table-s1|appendix-snr|fig2", "reproduce.target");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulsed homodyne detection: temporal-weight optimization toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "synthesize a detector trace");
  simulate->add_option("--config", sim.config_path, "JSON run configuration");
  simulate->add_option("--preset", sim.preset_name, "circuit preset shorthand (set1|set2|set3)");
  simulate->add_option("--out", sim.out_dir, "output directory");
  simulate->add_option("--seed", sim.seed, "override the RNG seed");
  simulate->add_option("--drift", sim.drift, "override the clock drift (s/period)");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "estimate noise kernels from traces");
  estimate->add_option("--trace", est.trace_path, "trace file")->required();
  estimate->add_option("--dark", est.dark_path, "dark (LO off) trace; emits shot+electronic+response");
  estimate->add_option("--role", est.role, "kernel role: auto|electronic|shot");
  estimate->add_option("--out", est.out_dir, "output directory");
  estimate->add_option("--format", est.format, "bin|csv (csv adds plot-ready matrices)");

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "compute readout weights from kernels");
  optimize->add_option("--shot", opt.shot_path, "shot kernel file")->required();
  optimize->add_option("--electronic", opt.electronic_path, "electronic kernel file")->required();
  optimize->add_option("--method", opt.method, "optimal|constant|peak");
  optimize->add_option("--harmonics", opt.harmonics, "frequency-truncation harmonic count N");
  optimize->add_option("--sweep", opt.sweep, "harmonic sweep a..b, emits sweep.csv");
  optimize->add_option("--preset", opt.preset_name, "circuit preset (peak method)");
  optimize->add_option("--peak-width", opt.peak_width, "boxcar width in seconds (peak method)");
  optimize->add_option("--out", opt.out_dir, "output directory");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "squeezing analysis from traces + weight");
  analyze->add_option("--vacuum", ana.vacuum_path, "vacuum trace")->required();
  analyze->add_option("--squeezed", ana.squeezed_path, "squeezed trace")->required();
  analyze->add_option("--antisqueezed", ana.antisqueezed_path, "antisqueezed trace")->required();
  analyze->add_option("--weight", ana.weight_path, "weight CSV")->required();
  analyze->add_option("--fs", ana.f_s, "sideband frequency (Hz)")->required();
  analyze->add_option("--block", ana.block, "outcomes per sideband block")->required();
  analyze->add_option("--predict-snr-db", ana.predict_snr_db, "also predict levels at this SNR");
  analyze->add_option("--drift", ana.drift, "align with this drift (s/period) before analysis");
  analyze->add_flag("--auto-drift", ana.auto_drift, "estimate drift from the vacuum trace");
  analyze->add_option("--out", ana.out_dir, "output directory");

  std::string target;
  auto* reproduce = app.add_subcommand("reproduce", "recompute published model values");
  reproduce->add_option("--target", target, "table-s1|appendix-snr|fig2")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(simulate)) return cmd_simulate(sim);
    if (app.got_subcommand(estimate)) return cmd_estimate(est);
    if (app.got_subcommand(optimize)) return cmd_optimize(opt);
    if (app.got_subcommand(analyze)) return cmd_analyze(ana);
    if (app.got_subcommand(reproduce)) return cmd_reproduce(target);
  } catch (const uhd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
