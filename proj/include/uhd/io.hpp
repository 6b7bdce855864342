#pragma once

#include <cstdint>
#include <string>

#include "uhd/kernels.hpp"
#include "uhd/optimizer.hpp"
#include "uhd/synth.hpp"

namespace uhd {

// Trace container: little-endian binary ("UHDT", version, J, L, sample rate,
// then J*L window-major samples) plus a "<path>.json" sidecar holding the
// seed, correction flags and the generation record.
void write_trace(const TraceSet& trace, const std::string& path);
TraceSet read_trace(const std::string& path);

// Kernel container: little-endian binary ("UHDK", version, L, then L*L
// row-major entries) plus a "<path>.json" sidecar (role, grid, provenance).
void write_kernel(const KernelMatrix& kernel, const std::string& path);
KernelMatrix read_kernel(const std::string& path);
void write_kernel_csv(const KernelMatrix& kernel, const std::string& path);

// Weight container: "index,value" CSV plus a "<path>.json" sidecar
// (method, N, f_c, peak_width, achieved_snr).
void write_weight(const WeightVector& w, const std::string& path);
WeightVector read_weight(const std::string& path);

// FNV-1a 64-bit digest of a file's bytes, for run manifests.
std::uint64_t fnv1a_digest(const std::string& path);
std::string digest_hex(std::uint64_t digest);

// Formats a double with enough digits to round-trip exactly (deterministic
// output for byte-identical reruns).
std::string format_double(double v);

}  // namespace uhd
