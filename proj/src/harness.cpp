// SPDX-License-Identifier: Apache-2.0
#include "dmimo/harness.hpp"

#include "dmimo/channel.hpp"
#include "dmimo/estimators.hpp"
#include "dmimo/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dmimo {

namespace {

constexpr Real kNano = 1e-9;
constexpr Real kMilli = 1e-3;

Real db10(Real x) { return 10.0 * std::log10(x); }

std::string format_real(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

struct TrialResult {
  bool ok = false;
  Mat true_cir;  // (M*L+1) x M
  Vec err_ls;    // per receiver
  Vec err_ml;
  Vec crbs;
};

TrialResult run_trial(const ExperimentConfig& config, const Vec& schedule,
                      const Mat& design, std::uint64_t trial,
                      std::uint64_t k_index) {
  TrialResult result;
  const int m = config.topology.links();
  result.err_ls.resize(m);
  result.err_ml.resize(m);
  result.crbs.resize(m);
  try {
    // Jitter streams are keyed by trial alone so every K point sees the
    // same channel realizations; observation noise is fresh per (K, trial).
    RngStream jitter_rng(config.seed, trial);
    const Topology jittered =
        jitter(config.topology, config.jitter_sigma, jitter_rng);
    const CirMatrix truth =
        build_cir(jittered, config.diffusion, config.noise, schedule);
    result.true_cir = truth.values;

    const Mat means = mean_observations(design, truth);
    RngStream obs_rng(config.seed, ((k_index + 1) << 32) + trial);
    const Mat counts =
        sample_observations(means, obs_rng).cast<Real>();

    const Mat ls_raw = ls_solve(design, counts);
    for (int j = 0; j < m; ++j) {
      const Vec truth_col = truth.values.col(j);
      result.err_ls[j] =
          (ls_raw.col(j).cwiseMax(0.0) - truth_col).squaredNorm();
      const Estimate ml = ml_estimate(Vec(counts.col(j)), design,
                                      ml_init_from_ls(ls_raw.col(j)));
      if (!ml.converged) {
        return result;
      }
      result.err_ml[j] = (ml.cir - truth_col).squaredNorm();
      result.crbs[j] = crb(design, truth_col);
    }
    result.ok = true;
  } catch (const std::exception&) {
    result.ok = false;
  }
  return result;
}

}  // namespace

void ExperimentConfig::validate() const {
  topology.validate();
  diffusion.validate();
  noise.validate();
  if (!(jitter_sigma >= 0.0)) {
    throw std::invalid_argument("experiment: jitter sigma must be >= 0");
  }
  if (trials < 1) {
    throw std::invalid_argument("experiment: at least one trial required");
  }
  if (base_length < diffusion.taps) {
    throw std::invalid_argument(
        "experiment: base length shorter than the channel memory");
  }
  if (k_list.empty()) {
    throw std::invalid_argument("experiment: empty K list");
  }
  for (int k : k_list) {
    if (k < base_length || k % base_length != 0) {
      throw std::invalid_argument(
          "experiment: every K must be a positive multiple of the base "
          "length");
    }
  }
  if (!sequences.empty()) {
    if (static_cast<int>(sequences.size()) != topology.links()) {
      throw std::invalid_argument(
          "experiment: one training sequence per transmitter required");
    }
    for (const TrainingSequence& seq : sequences) {
      if (seq.length() != base_length) {
        throw std::invalid_argument(
            "experiment: sequence length differs from the base length");
      }
      if (!validate_sequence(seq, constraints)) {
        throw std::invalid_argument("experiment: infeasible sequence " +
                                    seq.str());
      }
    }
  }
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
  ExperimentConfig out;

  for (const Vec3& p : cfg.get_points("tx_positions_nm")) {
    out.topology.tx.push_back(p * kNano);
  }
  for (const Vec3& p : cfg.get_points("rx_positions_nm")) {
    out.topology.rx.push_back(p * kNano);
  }
  out.topology.rx_radius = cfg.get_real("rx_radius_nm") * kNano;

  out.diffusion.diffusion = cfg.get_real("diffusion_m2s", 1e-9);
  out.diffusion.molecules = cfg.get_real("molecules", 1e5);
  out.diffusion.symbol_interval =
      cfg.get_real("symbol_interval_ms", 0.2) * kMilli;
  out.diffusion.taps = cfg.get_int("taps", 3);

  const std::string mode = cfg.get_string("noise_mode", "relative");
  if (mode == "relative") {
    out.noise.mode = NoiseModel::Mode::Relative;
  } else if (mode == "absolute") {
    out.noise.mode = NoiseModel::Mode::Absolute;
  } else {
    throw std::invalid_argument(
        "config: noise_mode must be 'relative' or 'absolute'");
  }
  out.noise.value = cfg.get_real("noise_value", 0.3);

  out.jitter_sigma = cfg.get_real("jitter_sigma_nm", 0.0) * kNano;
  out.trials = cfg.get_int("trials", 1);
  out.seed = cfg.get_u64("seed", 0);
  out.threads = cfg.get_int("threads", 0);

  if (cfg.has("sequences")) {
    for (const std::string& s : cfg.get_strings("sequences")) {
      out.sequences.push_back(TrainingSequence::parse(s));
    }
  }
  out.base_length = cfg.get_int(
      "k1", out.sequences.empty() ? 16 : out.sequences.front().length());
  out.constraints.max_ones = cfg.get_int("max_ones", out.base_length / 2);
  out.constraints.max_zero_run = cfg.get_int("max_zero_run", 4);

  if (cfg.has("k_list")) {
    for (Real k : cfg.get_reals("k_list")) {
      out.k_list.push_back(static_cast<int>(k));
    }
  } else {
    for (int reps = 1; reps <= 7; ++reps) {
      out.k_list.push_back(out.base_length * reps);
    }
  }
  std::sort(out.k_list.begin(), out.k_list.end());
  out.k_list.erase(std::unique(out.k_list.begin(), out.k_list.end()),
                   out.k_list.end());

  const std::string strategy = cfg.get_string("design_strategy", "local-search");
  if (strategy == "local-search") {
    out.design_strategy = DesignStrategy::LocalSearch;
  } else if (strategy == "exhaustive") {
    out.design_strategy = DesignStrategy::Exhaustive;
  } else {
    throw std::invalid_argument(
        "config: design_strategy must be 'local-search' or 'exhaustive'");
  }
  return out;
}

ExperimentConfig ExperimentConfig::paper2x2() {
  ExperimentConfig cfg;
  const Real d = 400.0 * kNano;
  const Real h = 200.0 * kNano;
  cfg.topology.tx = {Vec3(0, 0, 0), Vec3(0, h, 0)};
  cfg.topology.rx = {Vec3(d, 0, 0), Vec3(d, h, 0)};
  cfg.topology.rx_radius = 50.0 * kNano;
  cfg.diffusion = {1e-9, 1e5, 0.2 * kMilli, 3};
  cfg.noise = {NoiseModel::Mode::Relative, 0.3};
  cfg.jitter_sigma = 50.0 * kNano;
  cfg.trials = 1000;
  cfg.base_length = 16;
  cfg.k_list = {16, 32, 48, 64, 80, 96, 112};
  cfg.constraints = SequenceConstraints::defaults(16);
  cfg.sequences = {TrainingSequence::parse("1110000101011001"),
                   TrainingSequence::parse("1110100011100001")};
  cfg.seed = 0;
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path_or_preset) {
  if (!std::filesystem::exists(path_or_preset)) {
    if (path_or_preset == "paper2x2") {
      return ExperimentConfig::paper2x2();
    }
    throw std::runtime_error("config: no such file or preset: " +
                             path_or_preset);
  }
  return ExperimentConfig::from_config(Config::load(path_or_preset));
}

Real mse_db(const std::vector<Real>& squared_errors) {
  if (squared_errors.empty()) {
    throw std::invalid_argument("mse_db: no errors given");
  }
  const Real mean =
      std::accumulate(squared_errors.begin(), squared_errors.end(), 0.0) /
      static_cast<Real>(squared_errors.size());
  return db10(mean);
}

Real nmse_db(const std::vector<Real>& squared_errors,
             const std::vector<Vec>& true_cirs) {
  if (true_cirs.empty()) {
    throw std::invalid_argument("nmse_db: no true CIRs given");
  }
  Vec mean_cir = Vec::Zero(true_cirs.front().size());
  for (const Vec& c : true_cirs) {
    mean_cir += c;
  }
  mean_cir /= static_cast<Real>(true_cirs.size());
  const Real denom = mean_cir.squaredNorm();
  if (!(denom > 0.0)) {
    throw std::invalid_argument("nmse_db: mean true CIR has zero norm");
  }
  return mse_db(squared_errors) - db10(denom);
}

MseCurve run_montecarlo(const ExperimentConfig& config) {
  config.validate();
  const int m = config.topology.links();
  const Vec schedule = sampling_times(config.topology, config.diffusion);

  std::vector<TrainingSequence> base = config.sequences;
  if (base.empty()) {
    DesignProblem problem;
    problem.nominal = build_cir(config.topology, config.diffusion, config.noise);
    problem.base_length = config.base_length;
    problem.constraints = config.constraints;
    problem.taps = config.diffusion.taps;
    problem.strategy = config.design_strategy;
    problem.seed = config.seed;
    base = design(problem).sequences;
  }

  MseCurve curve;
  for (std::size_t k_index = 0; k_index < config.k_list.size(); ++k_index) {
    const int k_total = config.k_list[k_index];
    const int reps = k_total / config.base_length;

    std::vector<TrainingSequence> seqs;
    seqs.reserve(base.size());
    for (const TrainingSequence& s : base) {
      TrainingSequence longer = concatenate(s, reps);
      // Seam re-validation: repetition can create new zero runs.
      const SequenceConstraints scaled{k_total / 2,
                                       config.constraints.max_zero_run};
      if (!validate_sequence(longer, scaled)) {
        throw std::invalid_argument(
            "montecarlo: concatenated sequence violates constraints: " +
            longer.str());
      }
      seqs.push_back(std::move(longer));
    }
    const Mat design_matrix = build_design_matrix(seqs, config.diffusion.taps);

    std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
    int worker_count = config.threads > 0
                           ? config.threads
                           : static_cast<int>(std::thread::hardware_concurrency());
    worker_count = std::clamp(worker_count, 1, config.trials);

    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= config.trials) {
          return;
        }
        results[static_cast<std::size_t>(t)] =
            run_trial(config, schedule, design_matrix,
                      static_cast<std::uint64_t>(t), k_index);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < worker_count; ++w) {
      pool.emplace_back(worker);
    }
    worker();
    for (std::thread& th : pool) {
      th.join();
    }

    int failures = 0;
    for (const TrialResult& r : results) {
      failures += r.ok ? 0 : 1;
    }
    if (failures * 100 > config.trials) {
      throw std::runtime_error(
          "montecarlo: more than 1% of trials failed at K = " +
          std::to_string(k_total));
    }
    const int included = config.trials - failures;

    for (int j = 0; j < m; ++j) {
      std::vector<Real> ls_errors;
      std::vector<Real> ml_errors;
      std::vector<Vec> true_cols;
      Real crb_sum = 0.0;
      ls_errors.reserve(static_cast<std::size_t>(included));
      ml_errors.reserve(static_cast<std::size_t>(included));
      true_cols.reserve(static_cast<std::size_t>(included));
      for (const TrialResult& r : results) {
        if (!r.ok) {
          continue;
        }
        ls_errors.push_back(r.err_ls[j]);
        ml_errors.push_back(r.err_ml[j]);
        true_cols.emplace_back(r.true_cir.col(j));
        crb_sum += r.crbs[j];
      }
      const Real crb_db_value = db10(crb_sum / static_cast<Real>(included));

      MseCurve::Row ls_row{k_total,
                           j + 1,
                           "ls",
                           mse_db(ls_errors),
                           nmse_db(ls_errors, true_cols),
                           crb_db_value,
                           included,
                           failures};
      MseCurve::Row ml_row{k_total,
                           j + 1,
                           "ml",
                           mse_db(ml_errors),
                           nmse_db(ml_errors, true_cols),
                           crb_db_value,
                           included,
                           failures};
      curve.rows.push_back(std::move(ls_row));
      curve.rows.push_back(std::move(ml_row));
    }
  }

  std::sort(curve.rows.begin(), curve.rows.end(),
            [](const MseCurve::Row& a, const MseCurve::Row& b) {
              if (a.k != b.k) return a.k < b.k;
              if (a.receiver != b.receiver) return a.receiver < b.receiver;
              return a.estimator < b.estimator;
            });
  return curve;
}

std::string to_csv(const MseCurve& curve) {
  std::ostringstream out;
  out << "K,receiver,estimator,mse_db,nmse_db,crb_db,trials,failures\n";
  for (const MseCurve::Row& row : curve.rows) {
    out << row.k << ',' << row.receiver << ',' << row.estimator << ','
        << format_real(row.mse_db) << ',' << format_real(row.nmse_db) << ','
        << format_real(row.crb_db) << ',' << row.trials << ',' << row.failures
        << '\n';
  }
  return out.str();
}

void emit_csv(const MseCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("emit_csv: cannot open " + path);
  }
  out << to_csv(curve);
  if (!out) {
    throw std::runtime_error("emit_csv: write failed for " + path);
  }
}

}  // namespace dmimo
