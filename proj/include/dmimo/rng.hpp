// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmimo/types.hpp"

#include <array>
#include <cstdint>

namespace dmimo {

/// Deterministic random stream keyed by (seed, stream id). The same pair
/// reproduces the same draws across runs and platforms, so Monte Carlo
/// trials can own independent streams and still be bit-reproducible.
///
/// Backed by xoshiro256** with splitmix64 state expansion.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform draw on the open interval (0, 1).
  Real next_double();

  /// Standard normal draw (Box-Muller, two uniforms per call).
  Real next_gaussian();

  /// Exact Poisson draw with the given mean. Inversion by sequential search
  /// below mean 30, transformed rejection (PTRS) above; both are exact.
  std::int64_t next_poisson(Real mean);

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace dmimo
