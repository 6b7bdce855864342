#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "uhd/circuit.hpp"
#include "uhd/errors.hpp"
#include "uhd/io.hpp"
#include "uhd/kernels.hpp"
#include "uhd/optimizer.hpp"
#include "uhd/synth.hpp"

namespace fs = std::filesystem;

namespace {

const uhd::SamplingGrid kGrid{125, 1.25e-8};
const uhd::LOConfig kLO{2.7e-3, 8.0e-7, 1.25e-8};

// Fresh scratch directory per test case, removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "uhd-test-XXXXXX").string();
    path = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// The command-line binary under test: ctest exports UHD_CLI_BIN; running the
// test executable by hand falls back to the sibling "uhd" binary.
std::string cli_path() {
  if (const char* env = std::getenv("UHD_CLI_BIN")) return env;
  std::error_code ec;
  const fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const fs::path guess = self.parent_path() / "uhd";
    if (fs::exists(guess)) return guess.string();
  }
  return "uhd";
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const TempDir& dir, const std::string& args) {
  const std::string out_file = dir.file("stdout.txt");
  const std::string err_file = dir.file("stderr.txt");
  const std::string cmd =
      cli_path() + " " + args + " >" + out_file + " 2>" + err_file;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(out_file);
  r.err = read_text(err_file);
  return r;
}

uhd::TraceSet small_trace(std::uint64_t seed) {
  return uhd::synth_trace(uhd::preset("set1"), kGrid, kLO, uhd::StateSpec::vacuum(), 1.0e-12,
                          seed, 50);
}

}  // namespace

TEST_CASE("trace files round-trip samples, grid and generation record") {
  TempDir dir;
  const uhd::TraceSet trace = small_trace(42);
  const std::string path = dir.file("t.uhdt");
  uhd::write_trace(trace, path);
  CHECK(fs::exists(path));
  CHECK(fs::exists(path + ".json"));

  const uhd::TraceSet back = uhd::read_trace(path);
  CHECK(back.grid.L == trace.grid.L);
  CHECK(back.grid.T == doctest::Approx(trace.grid.T).epsilon(1e-15));
  CHECK(back.windows() == trace.windows());
  CHECK((back.samples - trace.samples).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.seed == trace.seed);
  CHECK(back.edge_invalid == trace.edge_invalid);
  CHECK(back.offset_corrected == trace.offset_corrected);
  CHECK(back.truth == trace.truth);
}

TEST_CASE("kernel files round-trip exactly and require their sidecar") {
  TempDir dir;
  const uhd::DerivedParams dp = uhd::derive_params(uhd::preset("set2"));
  const uhd::KernelMatrix e = uhd::build_E(dp, kGrid);
  const std::string path = dir.file("e.uhdk");
  uhd::write_kernel(e, path);

  const uhd::KernelMatrix back = uhd::read_kernel(path);
  CHECK(back.role == uhd::KernelRole::Electronic);
  CHECK(back.grid.L == e.grid.L);
  CHECK((back.values - e.values).cwiseAbs().maxCoeff() == 0.0);

  // The sidecar carries the role and grid; the payload alone is unusable.
  fs::remove(path + ".json");
  CHECK_THROWS_AS(uhd::read_kernel(path), uhd::IoError);

  // The CSV writer emits an L x L matrix (L rows of L comma-separated values).
  const std::string csv_path = dir.file("e.csv");
  uhd::write_kernel_csv(e, csv_path);
  const std::string csv = read_text(csv_path);
  long rows = 0;
  for (char c : csv) rows += c == '\n';
  CHECK(rows == e.grid.L);
}

TEST_CASE("weight files round-trip values and optimization metadata") {
  TempDir dir;
  const uhd::DerivedParams dp = uhd::derive_params(uhd::preset("set1"));
  const uhd::KernelMatrix e = uhd::build_E(dp, kGrid);
  const uhd::KernelMatrix r = uhd::build_R(dp, kGrid, kLO, uhd::preset("set1").eta_PD);
  const uhd::WeightVector w = uhd::optimize_weight(uhd::add(e, r), e, 7);

  const std::string path = dir.file("w.csv");
  uhd::write_weight(w, path);
  const uhd::WeightVector back = uhd::read_weight(path);
  CHECK(back.values.size() == w.values.size());
  CHECK((back.values - w.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.method == "optimal");
  CHECK(back.N == 7);
  CHECK(back.f_c == doctest::Approx(w.f_c).epsilon(1e-15));
  CHECK(back.achieved_snr == doctest::Approx(w.achieved_snr).epsilon(1e-15));
}

TEST_CASE("corrupt containers are rejected as I/O errors") {
  TempDir dir;

  const std::string bad_magic = dir.file("bad.uhdt");
  write_bytes(bad_magic, "NOPE this is not a trace container");
  write_bytes(bad_magic + ".json", "{}");
  CHECK_THROWS_AS(uhd::read_trace(bad_magic), uhd::IoError);

  // A valid header cut off mid-payload.
  const uhd::TraceSet trace = small_trace(1);
  const std::string full = dir.file("full.uhdt");
  uhd::write_trace(trace, full);
  const std::string bytes = read_text(full);
  const std::string cut = dir.file("cut.uhdt");
  write_bytes(cut, bytes.substr(0, bytes.size() / 2));
  write_bytes(cut + ".json", read_text(full + ".json"));
  CHECK_THROWS_AS(uhd::read_trace(cut), uhd::IoError);

  // Wrong container type: a trace payload read as a kernel.
  CHECK_THROWS_AS(uhd::read_kernel(full), uhd::IoError);

  CHECK_THROWS_AS(uhd::read_trace(dir.file("missing.uhdt")), uhd::IoError);
}

TEST_CASE("file digests match the 64-bit FNV-1a reference values") {
  TempDir dir;
  const struct {
    const char* content;
    std::uint64_t digest;
  } cases[] = {
      {"", 0xcbf29ce484222325ull},
      {"a", 0xaf63dc4c8601ec8cull},
      {"hello", 0xa430d84680aabd0bull},
  };
  int i = 0;
  for (const auto& c : cases) {
    const std::string path = dir.file("f" + std::to_string(i++));
    write_bytes(path, c.content);
    CHECK(uhd::fnv1a_digest(path) == c.digest);
  }
  CHECK(uhd::digest_hex(0xa430d84680aabd0bull) == "a430d84680aabd0b");
  CHECK(uhd::digest_hex(0x1ull) == "0000000000000001");
  CHECK_THROWS_AS(uhd::fnv1a_digest(dir.file("absent")), uhd::IoError);
}

TEST_CASE("doubles are formatted with round-trip precision") {
  for (double v : {0.1, -2.5, 1.0 / 3.0, 1.25e-8, 6.62607015e-34, 0.0, 1e300}) {
    const std::string s = uhd::format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("command line: simulate is deterministic and validates its config") {
  TempDir dir;

  CHECK(run_cli(dir, "--help").exit_code == 0);
  CHECK(run_cli(dir, "").exit_code == 2);

  const RunResult a = run_cli(dir, "simulate --preset set1 --seed 7 --out " + dir.file("a"));
  REQUIRE(a.exit_code == 0);
  CHECK(fs::exists(dir.file("a/trace.uhdt")));
  CHECK(fs::exists(dir.file("a/trace.uhdt.json")));
  CHECK(fs::exists(dir.file("a/simulate-manifest.json")));

  // Same seed, fresh directory: byte-identical trace and sidecar.
  const RunResult b = run_cli(dir, "simulate --preset set1 --seed 7 --out " + dir.file("b"));
  REQUIRE(b.exit_code == 0);
  CHECK(uhd::fnv1a_digest(dir.file("a/trace.uhdt")) == uhd::fnv1a_digest(dir.file("b/trace.uhdt")));
  CHECK(uhd::fnv1a_digest(dir.file("a/trace.uhdt.json")) ==
        uhd::fnv1a_digest(dir.file("b/trace.uhdt.json")));

  // A different seed changes the payload.
  const RunResult c = run_cli(dir, "simulate --preset set1 --seed 8 --out " + dir.file("c"));
  REQUIRE(c.exit_code == 0);
  CHECK(uhd::fnv1a_digest(dir.file("a/trace.uhdt")) != uhd::fnv1a_digest(dir.file("c/trace.uhdt")));

  // Config validation points at the offending field and exits with code 2.
  nlohmann::json bad{{"circuit", {{"preset", "set1"}}},
                     {"lo", {{"P_LO", 2.7e-3}, {"lambda", 8.0e-7}, {"T", 1.25e-8}}},
                     {"grid", {{"L", 125}, {"T", 1.25e-8}}},
                     {"state", {{"kind", "squeezed"}, {"r", 0.8}, {"eta0", 2.0}}},
                     {"J", 10}};
  write_bytes(dir.file("bad.json"), bad.dump());
  const RunResult d =
      run_cli(dir, "simulate --config " + dir.file("bad.json") + " --out " + dir.file("d"));
  CHECK(d.exit_code == 2);
  CHECK(d.err.find("state.eta0") != std::string::npos);

  nlohmann::json unknown = bad;
  unknown["state"] = {{"kind", "vacuum"}};
  unknown["typo_field"] = 1;
  write_bytes(dir.file("unknown.json"), unknown.dump());
  const RunResult e =
      run_cli(dir, "simulate --config " + dir.file("unknown.json") + " --out " + dir.file("e"));
  CHECK(e.exit_code == 2);
  CHECK(e.err.find("config.typo_field") != std::string::npos);
}

TEST_CASE("command line: estimate and optimize chain to a usable weight") {
  TempDir dir;

  nlohmann::json dark_cfg{{"circuit", {{"preset", "set1"}}},
                          {"lo", {{"P_LO", 0.0}, {"lambda", 8.0e-7}, {"T", 1.25e-8}}},
                          {"grid", {{"L", 125}, {"T", 1.25e-8}}},
                          {"J", 1000},
                          {"seed", 21}};
  write_bytes(dir.file("dark.json"), dark_cfg.dump());
  REQUIRE(run_cli(dir, "simulate --preset set1 --seed 20 --out " + dir.file("vac")).exit_code == 0);
  REQUIRE(run_cli(dir, "simulate --config " + dir.file("dark.json") + " --out " + dir.file("dark"))
              .exit_code == 0);

  // Dark + bright traces give the full kernel triple.
  const RunResult est = run_cli(dir, "estimate --trace " + dir.file("vac/trace.uhdt") +
                                         " --dark " + dir.file("dark/trace.uhdt") +
                                         " --format csv --out " + dir.file("k"));
  REQUIRE(est.exit_code == 0);
  for (const char* name : {"shot", "electronic", "response"}) {
    CHECK(fs::exists(dir.file(std::string("k/") + name + ".uhdk")));
    CHECK(fs::exists(dir.file(std::string("k/") + name + ".csv")));
  }

  // Role resolution from the sidecar: a dark trace estimates the electronic
  // kernel, and an explicit role must match the arithmetic elsewhere.
  const RunResult est_auto =
      run_cli(dir, "estimate --trace " + dir.file("dark/trace.uhdt") + " --out " + dir.file("ka"));
  REQUIRE(est_auto.exit_code == 0);
  CHECK(fs::exists(dir.file("ka/electronic.uhdk")));

  const RunResult opt = run_cli(dir, "optimize --shot " + dir.file("k/shot.uhdk") +
                                         " --electronic " + dir.file("k/electronic.uhdk") +
                                         " --harmonics 7 --out " + dir.file("w"));
  REQUIRE(opt.exit_code == 0);
  const uhd::WeightVector w = uhd::read_weight(dir.file("w/weight.csv"));
  CHECK(w.method == "optimal");
  CHECK(w.N == 7);
  CHECK(w.values.size() == 125);
  CHECK(std::abs(w.values.norm() - 1.0) <= 1e-12);

  // The stored weight reproduces the library's answer on the same kernels.
  const uhd::KernelMatrix shot = uhd::read_kernel(dir.file("k/shot.uhdk"));
  const uhd::KernelMatrix elec = uhd::read_kernel(dir.file("k/electronic.uhdk"));
  const uhd::WeightVector ref = uhd::optimize_weight(shot, elec, 7);
  CHECK((w.values - ref.values).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(w.achieved_snr == doctest::Approx(ref.achieved_snr).epsilon(1e-12));

  // Harmonic sweep: one line per N, SNR nondecreasing with the cutoff.
  const RunResult sweep = run_cli(dir, "optimize --shot " + dir.file("k/shot.uhdk") +
                                           " --electronic " + dir.file("k/electronic.uhdk") +
                                           " --sweep 0..12 --out " + dir.file("s"));
  REQUIRE(sweep.exit_code == 0);
  std::ifstream csv(dir.file("s/sweep.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "N,f_c_hz,snr,snr_db");
  int last_n = -1;
  double last_snr = 0.0;
  int rows = 0;
  std::string line;
  while (std::getline(csv, line)) {
    int n = 0;
    double f_c = 0, snr = 0, snr_db = 0;
    REQUIRE(std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &n, &f_c, &snr, &snr_db) == 4);
    CHECK(n == last_n + 1);
    CHECK(snr >= last_snr);
    last_n = n;
    last_snr = snr;
    ++rows;
  }
  CHECK(rows == 13);
}

TEST_CASE("command line: analyze produces a squeezing report and reproduce checks tables") {
  TempDir dir;

  // Three states measured with the same circuit, LO and seed layout. The
  // window count must give enough sideband blocks for stable level ratios:
  // 200 blocks keep the sample levels clear of the S_sq + S_asq <= 2
  // degeneracy veto in the efficiency inversion.
  const auto state_cfg = [&](const nlohmann::json& state, int seed) {
    return nlohmann::json{{"circuit", {{"preset", "set1"}}},
                          {"lo", {{"P_LO", 2.7e-3}, {"lambda", 8.0e-7}, {"T", 1.25e-8}}},
                          {"grid", {{"L", 125}, {"T", 1.25e-8}}},
                          {"state", state},
                          {"J", 128000},
                          {"seed", seed}};
  };
  write_bytes(dir.file("vac.json"), state_cfg({{"kind", "vacuum"}}, 31).dump());
  write_bytes(dir.file("sq.json"),
              state_cfg({{"kind", "squeezed"}, {"r", 0.8}, {"eta0", 0.64}, {"phase", 0.0}}, 32)
                  .dump());
  write_bytes(
      dir.file("asq.json"),
      state_cfg({{"kind", "squeezed"}, {"r", 0.8}, {"eta0", 0.64}, {"phase", 1.5707963267948966}},
                33)
          .dump());
  for (const char* name : {"vac", "sq", "asq"}) {
    REQUIRE(run_cli(dir, std::string("simulate --config ") + dir.file(name + std::string(".json")) +
                             " --out " + dir.file(name))
                .exit_code == 0);
  }

  // Kernels and weight from the vacuum + a dark run.
  nlohmann::json dark_cfg = state_cfg({{"kind", "vacuum"}}, 34);
  dark_cfg["lo"]["P_LO"] = 0.0;
  write_bytes(dir.file("dark.json"), dark_cfg.dump());
  REQUIRE(run_cli(dir, "simulate --config " + dir.file("dark.json") + " --out " + dir.file("dark"))
              .exit_code == 0);
  REQUIRE(run_cli(dir, "estimate --trace " + dir.file("vac/trace.uhdt") + " --dark " +
                           dir.file("dark/trace.uhdt") + " --out " + dir.file("k"))
              .exit_code == 0);
  REQUIRE(run_cli(dir, "optimize --shot " + dir.file("k/shot.uhdk") + " --electronic " +
                           dir.file("k/electronic.uhdk") + " --harmonics 62 --out " + dir.file("w"))
              .exit_code == 0);

  const RunResult ana = run_cli(
      dir, "analyze --vacuum " + dir.file("vac/trace.uhdt") + " --squeezed " +
               dir.file("sq/trace.uhdt") + " --antisqueezed " + dir.file("asq/trace.uhdt") +
               " --weight " + dir.file("w/weight.csv") +
               " --fs 1.5e6 --block 640 --predict-snr-db 18 --out " + dir.file("rep"));
  REQUIRE(ana.exit_code == 0);
  CHECK(ana.out.find("squeezing analysis") != std::string::npos);

  const nlohmann::json report = nlohmann::json::parse(read_text(dir.file("rep/report.json")));
  CHECK(report.contains("S_sq"));
  CHECK(report.contains("S_asq"));
  CHECK(report.contains("eta"));
  CHECK(report.contains("r"));
  CHECK(report.contains("predicted"));
  CHECK(report["counts"]["vac"].get<long>() == 128000 / 640);
  // Squeezed below vacuum, antisqueezed above: the signs must come out even
  // with only six sideband blocks.
  CHECK(report["S_sq"].get<double>() < 1.0);
  CHECK(report["S_asq"].get<double>() > 1.0);
  for (const char* name : {"hist_vacuum.csv", "hist_squeezed.csv", "hist_antisqueezed.csv",
                           "report.txt", "analyze-manifest.json"}) {
    CHECK(fs::exists(dir.file(std::string("rep/") + name)));
  }

  // Published-value tables: derived circuit parameters check out; an unknown
  // table name is a usage error.
  const RunResult rep = run_cli(dir, "reproduce --target table-s1");
  CHECK(rep.exit_code == 0);
  CHECK(rep.out.find("PASS") != std::string::npos);
  CHECK(rep.out.find("FAIL") == std::string::npos);
  CHECK(run_cli(dir, "reproduce --target bogus").exit_code == 2);
}
