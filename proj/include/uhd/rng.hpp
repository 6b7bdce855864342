#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

// Counter-based random number generation (Philox4x32-10). Every draw is a
// pure function of (seed, stream, counter), so independent components of a
// simulation consume independent streams, and window- or bin-indexed draws
// are identical whether generated serially or in parallel.
namespace uhd::rng {

// Stream identifiers, one per purpose.
inline constexpr std::uint32_t stream_electronic = 1;   // electronic-noise spectrum
inline constexpr std::uint32_t stream_quadrature = 2;   // per-pulse quadratures
inline constexpr std::uint32_t stream_scratch = 0xFFu;  // test/aux draws

namespace detail {
inline constexpr std::uint32_t mul_a = 0xD2511F53u;
inline constexpr std::uint32_t mul_b = 0xCD9E8D57u;
inline constexpr std::uint32_t weyl_a = 0x9E3779B9u;
inline constexpr std::uint32_t weyl_b = 0xBB67AE85u;
inline constexpr double two_pi = 6.28318530717958647692;
}  // namespace detail

// One Philox4x32-10 block: four 32-bit words from (seed, stream, counter).
inline std::array<std::uint32_t, 4> philox_block(std::uint64_t seed, std::uint32_t stream,
                                                 std::uint64_t counter) {
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  std::uint32_t c0 = static_cast<std::uint32_t>(counter);
  std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
  std::uint32_t c2 = stream;
  std::uint32_t c3 = 0;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(detail::mul_a) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(detail::mul_b) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += detail::weyl_a;
    k1 += detail::weyl_b;
  }
  return {c0, c1, c2, c3};
}

// Four uniforms in (0, 1), from block `counter`.
inline std::array<double, 4> uniform4(std::uint64_t seed, std::uint32_t stream,
                                      std::uint64_t counter) {
  const auto b = philox_block(seed, stream, counter);
  constexpr double scale = 1.0 / 4294967296.0;  // 2^-32
  return {(b[0] + 0.5) * scale, (b[1] + 0.5) * scale, (b[2] + 0.5) * scale,
          (b[3] + 0.5) * scale};
}

// Four independent standard normals (Box-Muller), from block `counter`.
inline std::array<double, 4> normal4(std::uint64_t seed, std::uint32_t stream,
                                     std::uint64_t counter) {
  const auto u = uniform4(seed, stream, counter);
  const double r0 = std::sqrt(-2.0 * std::log(u[0]));
  const double r1 = std::sqrt(-2.0 * std::log(u[2]));
  const double a0 = detail::two_pi * u[1];
  const double a1 = detail::two_pi * u[3];
  return {r0 * std::cos(a0), r0 * std::sin(a0), r1 * std::cos(a1), r1 * std::sin(a1)};
}

// Normal draw number `index` in the stream's global sequence (4 per block).
inline double normal_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  return normal4(seed, stream, index >> 2)[index & 3];
}

// Fills out[i] with normal draw number first + i.
inline void fill_normals(std::uint64_t seed, std::uint32_t stream, std::uint64_t first,
                         std::span<double> out) {
  std::uint64_t i = 0;
  const std::uint64_t n = out.size();
  while (i < n) {
    const std::uint64_t idx = first + i;
    const auto blk = normal4(seed, stream, idx >> 2);
    for (std::uint64_t lane = idx & 3; lane < 4 && i < n; ++lane, ++i) out[i] = blk[lane];
  }
}

// Uniform draw number `index` in (0, 1).
inline double uniform_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  return uniform4(seed, stream, index >> 2)[index & 3];
}

}  // namespace uhd::rng
