// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

#include <vector>

namespace dmimo {

/// Physical parameters of the diffusive link. All values are SI.
struct DiffusionParams {
  Real diffusion = 1e-9;        ///< diffusion coefficient, m^2/s
  Real molecules = 1e5;         ///< molecules released per ON symbol
  Real symbol_interval = 2e-4;  ///< symbol interval, s
  int taps = 3;                 ///< channel memory taps per link

  void validate() const;
};

/// Transmitter/receiver geometry for an M x M system. Positions in metres.
struct Topology {
  std::vector<Vec3> tx;
  std::vector<Vec3> rx;
  Real rx_radius = 0.0;

  int links() const { return static_cast<int>(tx.size()); }
  void validate() const;
};

/// Mean count of molecules counted at a receiver from sources outside the
/// modelled taps. Relative mode scales the paired link's first tap.
struct NoiseModel {
  enum class Mode { Relative, Absolute };
  Mode mode = Mode::Relative;
  Real value = 0.3;

  void validate() const;
};

/// Expected-count channel matrix, (M*L+1) x M. Column j stacks the L tap
/// blocks of receiver j (tap-major, transmitter-minor) followed by the
/// receiver's noise mean.
struct CirMatrix {
  Mat values;

  int links() const { return static_cast<int>(values.cols()); }
  int taps() const {
    return links() > 0 ? static_cast<int>((values.rows() - 1) / values.cols())
                       : 0;
  }
  /// c of link (tx -> rx) at the given lag; indices 0-based.
  Real tap(int tx, int rx, int lag) const {
    return values(static_cast<Index>(lag) * links() + tx, rx);
  }
  Real noise(int rx) const { return values(values.rows() - 1, rx); }
};

/// Expected number of molecules inside a passive spherical receiver at time
/// t after an impulsive point release at distance r:
///   c(t) = N * V_R * (4 pi D t)^(-3/2) * exp(-r^2 / (4 D t)),
/// with V_R the receiver volume. Uniform-concentration approximation.
Real green_mean(Real t, Real distance, const DiffusionParams& params,
                Real rx_radius);

/// Time at which green_mean peaks for a given distance: r^2 / (6 D).
Real peak_time(Real distance, Real diffusion);

/// Per-receiver sampling times: each receiver samples at the peak time of
/// its paired transmitter's link.
Vec sampling_times(const Topology& topology, const DiffusionParams& params);

/// Ground-truth CIR matrix for the given geometry. The overload taking
/// explicit sample times supports a sampling schedule held fixed (from the
/// nominal geometry) while positions fluctuate.
CirMatrix build_cir(const Topology& topology, const DiffusionParams& params,
                    const NoiseModel& noise);
CirMatrix build_cir(const Topology& topology, const DiffusionParams& params,
                    const NoiseModel& noise, const Vec& sample_times);

/// Independently perturbs every coordinate of every transmitter and receiver
/// with zero-mean Gaussian noise of standard deviation sigma (metres).
/// sigma == 0 returns the input unchanged without consuming draws.
Topology jitter(const Topology& topology, Real sigma, RngStream& rng);

}  // namespace dmimo
