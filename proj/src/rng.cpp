// SPDX-License-Identifier: Apache-2.0
#include "dmimo/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dmimo {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += kGolden);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// log(k!) — cumulative table for small k, Stirling series above it.
Real log_factorial(std::int64_t k) {
  static const std::vector<Real> table = [] {
    std::vector<Real> t(1024);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      t[i] = t[i - 1] + std::log(static_cast<Real>(i));
    }
    return t;
  }();
  if (k < static_cast<std::int64_t>(table.size())) {
    return table[static_cast<std::size_t>(k)];
  }
  const Real x = static_cast<Real>(k) + 1.0;  // lgamma(k + 1)
  const Real inv = 1.0 / x;
  const Real inv2 = inv * inv;
  return (x - 0.5) * std::log(x) - x + 0.9189385332046727 +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (kGolden * (stream + 1));
  for (auto& word : state_) {
    word = splitmix64(x);
  }
  // splitmix64 never yields four zero words in a row, but guard regardless:
  // xoshiro must not start from the all-zero state.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
    state_[0] = kGolden;
  }
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

Real RngStream::next_double() {
  // 53 mantissa bits, shifted into (0, 1) so log() of a draw is always finite.
  return (static_cast<Real>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

Real RngStream::next_gaussian() {
  const Real u1 = next_double();
  const Real u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

std::int64_t RngStream::next_poisson(Real mean) {
  if (!(mean >= 0.0)) {
    throw std::invalid_argument("next_poisson: mean must be nonnegative");
  }
  if (mean == 0.0) {
    return 0;
  }

  if (mean < 30.0) {
    // Inversion by sequential search over the CDF.
    const Real u = next_double();
    std::int64_t k = 0;
    Real p = std::exp(-mean);
    Real cdf = p;
    const std::int64_t cap =
        static_cast<std::int64_t>(mean + 40.0 * std::sqrt(mean) + 50.0);
    while (u > cdf && k < cap) {
      ++k;
      p *= mean / static_cast<Real>(k);
      cdf += p;
    }
    return k;
  }

  // PTRS: transformed rejection with squeeze (Hormann), exact for mean >= 10.
  const Real b = 0.931 + 2.53 * std::sqrt(mean);
  const Real a = -0.059 + 0.02483 * b;
  const Real inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const Real v_r = 0.9277 - 3.6224 / (b - 2.0);
  const Real log_mean = std::log(mean);
  for (;;) {
    const Real u = next_double() - 0.5;
    const Real v = next_double();
    const Real us = 0.5 - std::abs(u);
    const Real kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) {
      return static_cast<std::int64_t>(kf);
    }
    if (kf < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    const std::int64_t k = static_cast<std::int64_t>(kf);
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_mean - mean - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace dmimo
