// SPDX-License-Identifier: Apache-2.0
#include "dmimo/cir.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dmimo {

void DiffusionParams::validate() const {
  if (!(diffusion > 0.0)) {
    throw std::invalid_argument("diffusion coefficient must be positive");
  }
  if (!(molecules >= 1.0)) {
    throw std::invalid_argument("molecules per symbol must be at least 1");
  }
  if (!(symbol_interval > 0.0)) {
    throw std::invalid_argument("symbol interval must be positive");
  }
  if (taps < 1) {
    throw std::invalid_argument("tap count must be at least 1");
  }
}

void Topology::validate() const {
  if (tx.empty() || tx.size() != rx.size()) {
    throw std::invalid_argument(
        "topology needs the same, nonzero number of transmitters and "
        "receivers");
  }
  if (!(rx_radius > 0.0)) {
    throw std::invalid_argument("receiver radius must be positive");
  }
  for (const Vec3& t : tx) {
    for (const Vec3& r : rx) {
      if (!((t - r).norm() > rx_radius)) {
        throw std::invalid_argument(
            "degenerate geometry: a transmitter lies inside a receiver");
      }
    }
  }
}

void NoiseModel::validate() const {
  if (!(value >= 0.0)) {
    throw std::invalid_argument("noise value must be nonnegative");
  }
}

Real green_mean(Real t, Real distance, const DiffusionParams& params,
                Real rx_radius) {
  params.validate();
  if (!(t > 0.0)) {
    throw std::invalid_argument("green_mean: time must be positive");
  }
  if (!(distance > 0.0)) {
    throw std::invalid_argument("green_mean: distance must be positive");
  }
  if (!(rx_radius > 0.0)) {
    throw std::invalid_argument("green_mean: receiver radius must be positive");
  }
  const Real volume =
      (4.0 / 3.0) * std::numbers::pi * rx_radius * rx_radius * rx_radius;
  const Real spread = 4.0 * params.diffusion * t;
  return params.molecules * volume *
         std::pow(std::numbers::pi * spread, -1.5) *
         std::exp(-distance * distance / spread);
}

Real peak_time(Real distance, Real diffusion) {
  if (!(distance > 0.0) || !(diffusion > 0.0)) {
    throw std::invalid_argument("peak_time: inputs must be positive");
  }
  return distance * distance / (6.0 * diffusion);
}

Vec sampling_times(const Topology& topology, const DiffusionParams& params) {
  topology.validate();
  params.validate();
  const int m = topology.links();
  Vec times(m);
  for (int j = 0; j < m; ++j) {
    times[j] = peak_time((topology.tx[j] - topology.rx[j]).norm(),
                         params.diffusion);
  }
  return times;
}

CirMatrix build_cir(const Topology& topology, const DiffusionParams& params,
                    const NoiseModel& noise) {
  return build_cir(topology, params, noise, sampling_times(topology, params));
}

CirMatrix build_cir(const Topology& topology, const DiffusionParams& params,
                    const NoiseModel& noise, const Vec& sample_times) {
  topology.validate();
  params.validate();
  noise.validate();
  const int m = topology.links();
  if (sample_times.size() != m) {
    throw std::invalid_argument("build_cir: one sample time per receiver");
  }

  CirMatrix cir;
  cir.values.resize(static_cast<Index>(m) * params.taps + 1, m);
  for (int j = 0; j < m; ++j) {
    for (int lag = 0; lag < params.taps; ++lag) {
      const Real t = sample_times[j] + lag * params.symbol_interval;
      for (int i = 0; i < m; ++i) {
        const Real r = (topology.tx[i] - topology.rx[j]).norm();
        cir.values(static_cast<Index>(lag) * m + i, j) =
            green_mean(t, r, params, topology.rx_radius);
      }
    }
    cir.values(cir.values.rows() - 1, j) =
        noise.mode == NoiseModel::Mode::Relative
            ? noise.value * cir.tap(j, j, 0)
            : noise.value;
  }
  return cir;
}

Topology jitter(const Topology& topology, Real sigma, RngStream& rng) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("jitter: sigma must be nonnegative");
  }
  if (sigma == 0.0) {
    return topology;
  }
  Topology out = topology;
  for (Vec3& p : out.tx) {
    for (int axis = 0; axis < 3; ++axis) {
      p[axis] += sigma * rng.next_gaussian();
    }
  }
  for (Vec3& p : out.rx) {
    for (int axis = 0; axis < 3; ++axis) {
      p[axis] += sigma * rng.next_gaussian();
    }
  }
  return out;
}

}  // namespace dmimo
