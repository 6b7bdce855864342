#include "uhd/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

#include "uhd/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; this build targets little-endian hosts");

namespace uhd {

namespace {

void write_bytes(std::ofstream& os, const void* data, std::size_t n, const std::string& path) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!os) throw IoError("failed writing to " + path);
}

void read_bytes(std::ifstream& is, void* data, std::size_t n, const std::string& path) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n)) {
    throw IoError("short read from " + path);
  }
}

void write_u32(std::ofstream& os, std::uint32_t v, const std::string& path) {
  write_bytes(os, &v, sizeof v, path);
}

std::uint32_t read_u32(std::ifstream& is, const std::string& path) {
  std::uint32_t v = 0;
  read_bytes(is, &v, sizeof v, path);
  return v;
}

void write_f64(std::ofstream& os, double v, const std::string& path) {
  write_bytes(os, &v, sizeof v, path);
}

double read_f64(std::ifstream& is, const std::string& path) {
  double v = 0;
  read_bytes(is, &v, sizeof v, path);
  return v;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const std::string text = j.dump(2);
  write_bytes(os, text.data(), text.size(), path);
  os.put('\n');
  if (!os) throw IoError("failed writing to " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
  return j;
}

constexpr std::uint32_t trace_version = 1;
constexpr std::uint32_t kernel_version = 1;

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trace(const TraceSet& trace, const std::string& path) {
  trace.grid.validate();
  const long J = trace.windows();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_bytes(os, "UHDT", 4, path);
  write_u32(os, trace_version, path);
  write_u32(os, static_cast<std::uint32_t>(J), path);
  write_u32(os, static_cast<std::uint32_t>(trace.grid.L), path);
  write_f64(os, trace.grid.sample_rate(), path);
  write_bytes(os, trace.samples.data(), sizeof(double) * static_cast<std::size_t>(J) * trace.grid.L,
              path);
  os.close();
  if (!os) throw IoError("failed writing to " + path);

  nlohmann::json side{{"format_version", trace_version},
                      {"seed", trace.seed},
                      {"offset_corrected", trace.offset_corrected},
                      {"edge_invalid", trace.edge_invalid},
                      {"truth", trace.truth}};
  write_json_file(side, path + ".json");
}

TraceSet read_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[4] = {};
  read_bytes(is, magic, 4, path);
  if (std::memcmp(magic, "UHDT", 4) != 0) throw IoError(path + ": bad magic (not a trace file)");
  const std::uint32_t version = read_u32(is, path);
  if (version != trace_version) {
    throw IoError(path + ": unsupported trace format version " + std::to_string(version));
  }
  const std::uint32_t J = read_u32(is, path);
  const std::uint32_t L = read_u32(is, path);
  const double fs = read_f64(is, path);
  if (J == 0 || L < 2 || !(fs > 0)) throw IoError(path + ": corrupt trace header");

  TraceSet trace;
  trace.grid.L = static_cast<int>(L);
  trace.grid.T = static_cast<double>(L) / fs;
  trace.samples.resize(L, J);
  read_bytes(is, trace.samples.data(), sizeof(double) * static_cast<std::size_t>(J) * L, path);

  const std::string side_path = path + ".json";
  if (std::filesystem::exists(side_path)) {
    const nlohmann::json side = read_json_file(side_path);
    trace.seed = side.value("seed", std::uint64_t{0});
    trace.offset_corrected = side.value("offset_corrected", false);
    trace.edge_invalid = side.value("edge_invalid", 0);
    if (side.contains("truth")) trace.truth = side.at("truth");
  }
  return trace;
}

void write_kernel(const KernelMatrix& kernel, const std::string& path) {
  const long L = kernel.values.rows();
  if (L != kernel.values.cols()) throw ValidationError("kernel matrix must be square");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_bytes(os, "UHDK", 4, path);
  write_u32(os, kernel_version, path);
  write_u32(os, static_cast<std::uint32_t>(L), path);
  std::vector<double> row(static_cast<std::size_t>(L));
  for (long i = 0; i < L; ++i) {
    for (long j = 0; j < L; ++j) row[static_cast<std::size_t>(j)] = kernel.values(i, j);
    write_bytes(os, row.data(), sizeof(double) * row.size(), path);
  }
  os.close();
  if (!os) throw IoError("failed writing to " + path);

  nlohmann::json side{{"format_version", kernel_version},
                      {"role", role_name(kernel.role)},
                      {"grid", {{"L", kernel.grid.L}, {"T", kernel.grid.T}}},
                      {"provenance",
                       {{"kind", kernel.provenance.kind == Provenance::Kind::Model ? "model"
                                                                                   : "estimated"},
                        {"n_windows", kernel.provenance.n_windows},
                        {"low_statistics", kernel.provenance.low_statistics}}},
                      {"warning", kernel.warning}};
  write_json_file(side, path + ".json");
}

KernelMatrix read_kernel(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[4] = {};
  read_bytes(is, magic, 4, path);
  if (std::memcmp(magic, "UHDK", 4) != 0) throw IoError(path + ": bad magic (not a kernel file)");
  const std::uint32_t version = read_u32(is, path);
  if (version != kernel_version) {
    throw IoError(path + ": unsupported kernel format version " + std::to_string(version));
  }
  const std::uint32_t L = read_u32(is, path);
  if (L < 2) throw IoError(path + ": corrupt kernel header");

  KernelMatrix kernel;
  kernel.values.resize(L, L);
  std::vector<double> row(L);
  for (std::uint32_t i = 0; i < L; ++i) {
    read_bytes(is, row.data(), sizeof(double) * L, path);
    for (std::uint32_t j = 0; j < L; ++j) kernel.values(i, j) = row[j];
  }

  const std::string side_path = path + ".json";
  if (!std::filesystem::exists(side_path)) {
    throw IoError(side_path + ": kernel sidecar missing (role and grid unknown)");
  }
  const nlohmann::json side = read_json_file(side_path);
  try {
    kernel.role = role_from_name(side.at("role").get<std::string>());
    kernel.grid.L = side.at("grid").at("L").get<int>();
    kernel.grid.T = side.at("grid").at("T").get<double>();
    const auto& prov = side.at("provenance");
    kernel.provenance.kind = prov.at("kind").get<std::string>() == "estimated"
                                 ? Provenance::Kind::Estimated
                                 : Provenance::Kind::Model;
    kernel.provenance.n_windows = prov.at("n_windows").get<long>();
    kernel.provenance.low_statistics = prov.at("low_statistics").get<bool>();
    kernel.warning = side.value("warning", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(side_path + ": malformed kernel sidecar: " + e.what());
  }
  kernel.grid.validate();
  if (kernel.grid.L != static_cast<int>(L)) {
    throw IoError(path + ": sidecar grid does not match the matrix dimension");
  }
  return kernel;
}

void write_kernel_csv(const KernelMatrix& kernel, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const long L = kernel.values.rows();
  for (long i = 0; i < L; ++i) {
    for (long j = 0; j < L; ++j) {
      if (j > 0) os.put(',');
      const std::string v = format_double(kernel.values(i, j));
      write_bytes(os, v.data(), v.size(), path);
    }
    os.put('\n');
  }
  if (!os) throw IoError("failed writing to " + path);
}

void write_weight(const WeightVector& w, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "index,value\n";
  for (long l = 0; l < w.values.size(); ++l) {
    os << l << ',' << format_double(w.values[l]) << '\n';
  }
  os.close();
  if (!os) throw IoError("failed writing to " + path);

  nlohmann::json side{{"method", w.method}, {"N", w.N}, {"f_c", w.f_c},
                      {"peak_width", w.peak_width}};
  if (std::isfinite(w.achieved_snr)) {
    side["achieved_snr"] = w.achieved_snr;
  } else {
    side["achieved_snr"] = nullptr;
  }
  write_json_file(side, path + ".json");
}

WeightVector read_weight(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,", 0) != 0) {
    throw IoError(path + ": not a weight CSV (missing header)");
  }
  std::vector<double> values;
  long expected = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(path + ": malformed CSV row '" + line + "'");
    long idx = 0;
    double val = 0;
    const auto r1 = std::from_chars(line.data(), line.data() + comma, idx);
    const auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), val);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || idx != expected) {
      throw IoError(path + ": malformed CSV row '" + line + "'");
    }
    values.push_back(val);
    ++expected;
  }
  if (values.size() < 2) throw IoError(path + ": weight has fewer than 2 entries");

  WeightVector w;
  w.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));
  w.achieved_snr = std::numeric_limits<double>::quiet_NaN();

  const std::string side_path = path + ".json";
  if (std::filesystem::exists(side_path)) {
    const nlohmann::json side = read_json_file(side_path);
    w.method = side.value("method", std::string{});
    w.N = side.value("N", 0);
    w.f_c = side.value("f_c", 0.0);
    w.peak_width = side.value("peak_width", 0.0);
    if (side.contains("achieved_snr") && side.at("achieved_snr").is_number()) {
      w.achieved_snr = side.at("achieved_snr").get<double>();
    }
  }
  return w;
}

std::uint64_t fnv1a_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ull;  // FNV-1a 64-bit offset basis
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    const std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ull;
    }
  }
  return hash;
}

std::string digest_hex(std::uint64_t digest) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << digest;
  return os.str();
}

}  // namespace uhd
