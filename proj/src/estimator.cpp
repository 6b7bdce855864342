#include "uhd/estimator.hpp"

#include <sstream>
#include <vector>

#include "uhd/errors.hpp"
#include "uhd/threading.hpp"

namespace uhd {

TraceSet offset_correct(const TraceSet& trace) {
  const long J = trace.windows();
  if (J < 2) throw ValidationError("offset correction needs at least 2 windows", "trace.J");
  TraceSet out = trace;
  const Eigen::VectorXd means = trace.samples.rowwise().mean();
  out.samples.colwise() -= means;
  out.offset_corrected = true;
  return out;
}

KernelMatrix estimate_kernel(const TraceSet& trace, KernelRole role) {
  if (!trace.offset_corrected) {
    throw ValidationError("trace must be offset-corrected before kernel estimation");
  }
  const long J = trace.windows();
  const long edge = trace.edge_invalid;
  const long first = edge;
  const long count = J - 2 * edge;
  if (count < 1) {
    throw ValidationError("no usable windows left after excluding edge transients", "trace.J");
  }
  const int L = trace.grid.L;

  // Accumulate per-chunk partial products and combine them in chunk order so
  // the result is bit-identical for any thread count.
  constexpr std::int64_t chunk = 4096;
  const std::size_t n_chunks = static_cast<std::size_t>((count + chunk - 1) / chunk);
  std::vector<Eigen::MatrixXd> partials(n_chunks);
  parallel_chunks(count, chunk, [&](std::int64_t begin, std::int64_t end, std::size_t idx) {
    const auto block = trace.samples.middleCols(first + begin, end - begin);
    partials[idx].noalias() = block * block.transpose();
  });

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(L, L);
  for (const auto& part : partials) sum += part;

  KernelMatrix k;
  k.role = role;
  k.grid = trace.grid;
  k.values = sum / static_cast<double>(count);
  // Enforce exact symmetry against floating-point drift in the accumulation.
  k.values = 0.5 * (k.values + k.values.transpose()).eval();
  k.provenance.kind = Provenance::Kind::Estimated;
  k.provenance.n_windows = count;
  if (count < 100) {
    k.provenance.low_statistics = true;
    std::ostringstream msg;
    msg << "second-moment estimate from only " << count
        << " windows; sampling noise is large below 100";
    k.warning = msg.str();
  }
  return k;
}

PulseOverlay pulse_overlay(const TraceSet& trace, int block) {
  if (block < 1) throw ValidationError("block must be >= 1", "overlay.block");
  const long J = trace.windows();
  if (J < block) throw ValidationError("trace has fewer windows than one block", "overlay.block");
  const int L = trace.grid.L;
  const long n_seg = J / block;

  PulseOverlay out;
  out.block = block;
  out.dropped = J - n_seg * block;
  out.segments.resize(static_cast<long>(block) * L, n_seg);
  for (long s = 0; s < n_seg; ++s) {
    for (int b = 0; b < block; ++b) {
      out.segments.col(s).segment(static_cast<long>(b) * L, L) =
          trace.samples.col(s * block + b);
    }
  }
  if (out.dropped > 0) {
    std::ostringstream msg;
    msg << "dropped " << out.dropped << " trailing windows that do not fill a " << block
        << "-period segment";
    out.notice = msg.str();
  }
  return out;
}

}  // namespace uhd
