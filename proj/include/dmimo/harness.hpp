// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmimo/cir.hpp"
#include "dmimo/config.hpp"
#include "dmimo/design.hpp"
#include "dmimo/training.hpp"
#include "dmimo/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dmimo {

/// Full description of a Monte Carlo estimation experiment.
struct ExperimentConfig {
  Topology topology;
  DiffusionParams diffusion;
  NoiseModel noise;
  Real jitter_sigma = 0.0;  ///< position jitter std dev per coordinate, m
  int trials = 1;
  int base_length = 16;     ///< K1; longer runs concatenate the base design
  std::vector<int> k_list;  ///< training lengths, multiples of base_length
  SequenceConstraints constraints = SequenceConstraints::defaults(16);
  /// Base sequences, one per transmitter. Empty means: run the designer.
  std::vector<TrainingSequence> sequences;
  DesignStrategy design_strategy = DesignStrategy::LocalSearch;
  std::uint64_t seed = 0;
  int threads = 0;  ///< worker threads; 0 picks the hardware count

  void validate() const;

  static ExperimentConfig from_config(const Config& cfg);

  /// Bundled 2x2 reference scenario: 400 nm link distance, 200 nm lateral
  /// spacing, 50 nm receivers, three taps, designed length-16 sequences.
  static ExperimentConfig paper2x2();
};

/// Loads an experiment from a config file path, or from a named built-in
/// preset ("paper2x2") when no such file exists.
ExperimentConfig load_experiment(const std::string& path_or_preset);

/// Monte Carlo results: one row per (K, receiver, estimator).
struct MseCurve {
  struct Row {
    int k = 0;
    int receiver = 0;  ///< 1-based
    std::string estimator;
    Real mse_db = 0.0;
    Real nmse_db = 0.0;
    Real crb_db = 0.0;  ///< identical across estimators of the same row group
    int trials = 0;     ///< trials included in the averages
    int failures = 0;   ///< trials excluded (estimation failure)
  };
  std::vector<Row> rows;
};

/// Runs the experiment: per trial, jitter the geometry, rebuild the true
/// CIR on the nominal sampling schedule, draw Poisson observations under
/// the concatenated design, estimate with ML and LS, and accumulate squared
/// errors against the realized CIR plus the CRB at that CIR. Trials run in
/// a worker pool and reduce in trial order, so output is seed-deterministic.
/// More than 1% failed trials aborts.
MseCurve run_montecarlo(const ExperimentConfig& config);

/// 10*log10 of the mean squared error.
Real mse_db(const std::vector<Real>& squared_errors);

/// mse_db minus 10*log10 of the squared norm of the mean true CIR.
Real nmse_db(const std::vector<Real>& squared_errors,
             const std::vector<Vec>& true_cirs);

std::string to_csv(const MseCurve& curve);
void emit_csv(const MseCurve& curve, const std::string& path);

}  // namespace dmimo
