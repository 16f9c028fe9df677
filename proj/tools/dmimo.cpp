// SPDX-License-Identifier: Apache-2.0
//
// dmimo command-line front end: CIR generation, sequence design, channel
// estimation from observation dumps, CRB evaluation, and the Monte Carlo
// experiment driver.

#include "dmimo/channel.hpp"
#include "dmimo/estimators.hpp"
#include "dmimo/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace dmimo;

std::string format_real(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

void print_cir_csv(std::ostream& out, const CirMatrix& cir) {
  out << "receiver,tap,transmitter_or_noise,value\n";
  for (int j = 0; j < cir.links(); ++j) {
    for (int lag = 0; lag < cir.taps(); ++lag) {
      for (int i = 0; i < cir.links(); ++i) {
        out << (j + 1) << ',' << lag << ',' << (i + 1) << ','
            << format_real(cir.tap(i, j, lag)) << '\n';
      }
    }
    out << (j + 1) << ',' << ",noise," << format_real(cir.noise(j)) << '\n';
  }
}

std::vector<TrainingSequence> parse_sequence_list(const std::string& arg) {
  std::vector<TrainingSequence> seqs;
  std::stringstream ss(arg);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) {
      seqs.push_back(TrainingSequence::parse(token));
    }
  }
  if (seqs.empty()) {
    throw std::invalid_argument("no sequences given");
  }
  return seqs;
}

// Observation dump format: header "k,receiver,count", one row per sample.
CountMat read_observations(const std::string& path, int links, int taps) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open observations file " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty observations file " + path);
  }
  struct Entry {
    int k;
    int receiver;
    long long count;
  };
  std::vector<Entry> entries;
  int max_k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    Entry e{};
    if (std::sscanf(line.c_str(), "%d,%d,%lld", &e.k, &e.receiver, &e.count) != 3) {
      throw std::runtime_error("bad observations row: " + line);
    }
    if (e.k < taps || e.receiver < 1 || e.receiver > links || e.count < 0) {
      throw std::runtime_error("out-of-range observations row: " + line);
    }
    max_k = std::max(max_k, e.k);
    entries.push_back(e);
  }
  if (entries.empty()) {
    throw std::runtime_error("observations file has no samples: " + path);
  }
  CountMat counts = CountMat::Constant(max_k - taps + 1, links, -1);
  for (const Entry& e : entries) {
    counts(e.k - taps, e.receiver - 1) = e.count;
  }
  if ((counts.array() < 0).any()) {
    throw std::runtime_error("observations file is missing samples");
  }
  return counts;
}

int run(int argc, char** argv) {
  CLI::App app{"Channel estimation toolkit for diffusive MIMO molecular "
               "communication"};
  app.require_subcommand(1);

  std::string config_path;
  std::string obs_path;
  std::string out_path;
  std::string seq_arg;
  std::string strategy = "local-search";
  int k1 = 0;
  int max_zero_run = -1;
  int trials = 0;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto* gen = app.add_subcommand("gen-cir",
                                 "Print the nominal CIR matrix as CSV");
  gen->add_option("--config", config_path, "Config file or preset name")
      ->required();

  auto* design_cmd = app.add_subcommand(
      "design-seq", "Search for CRB-minimizing training sequences");
  design_cmd->add_option("--config", config_path, "Config file or preset name")
      ->required();
  design_cmd->add_option("--k1", k1, "Base sequence length");
  design_cmd->add_option("--max-zero-run", max_zero_run,
                         "Longest allowed run of zeros");
  design_cmd->add_option("--strategy", strategy,
                         "'exhaustive' or 'local-search'");
  design_cmd->add_option("--seed", seed, "Search seed")
      ->trigger_on_parse()
      ->each([&](const std::string&) { seed_given = true; });

  int sim_k = 0;
  auto* sim = app.add_subcommand(
      "simulate", "Draw one observation dump under the nominal channel");
  sim->add_option("--config", config_path, "Config file or preset name")
      ->required();
  sim->add_option("--k", sim_k, "Training length (multiple of the base)");
  sim->add_option("--seed", seed, "Observation noise seed")
      ->trigger_on_parse()
      ->each([&](const std::string&) { seed_given = true; });
  sim->add_option("--out", out_path, "Output CSV path")->required();

  auto* est = app.add_subcommand(
      "estimate", "Estimate the CIR from an observation dump (ML and LS)");
  est->add_option("--config", config_path, "Config file or preset name")
      ->required();
  est->add_option("--obs", obs_path, "Observations CSV (k,receiver,count)")
      ->required();

  auto* crb_cmd = app.add_subcommand(
      "crb", "CRB of a training design at the nominal CIR");
  crb_cmd->add_option("--config", config_path, "Config file or preset name")
      ->required();
  crb_cmd->add_option("--seq", seq_arg, "Comma-separated bit-strings")
      ->required();

  auto* mc = app.add_subcommand("montecarlo",
                                "Run the MSE-vs-K Monte Carlo experiment");
  mc->add_option("--config", config_path, "Config file or preset name")
      ->required();
  mc->add_option("--trials", trials, "Trials per K point");
  mc->add_option("--seed", seed, "Master seed")
      ->trigger_on_parse()
      ->each([&](const std::string&) { seed_given = true; });
  mc->add_option("--out", out_path, "Output CSV path")->required();
  mc->add_option("--threads", threads, "Worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const ExperimentConfig cfg = load_experiment(config_path);
    print_cir_csv(std::cout,
                  build_cir(cfg.topology, cfg.diffusion, cfg.noise));
    return 0;
  }

  if (design_cmd->parsed()) {
    const ExperimentConfig cfg = load_experiment(config_path);
    DesignProblem problem;
    problem.nominal = build_cir(cfg.topology, cfg.diffusion, cfg.noise);
    problem.base_length = k1 > 0 ? k1 : cfg.base_length;
    problem.constraints = SequenceConstraints::defaults(problem.base_length);
    if (max_zero_run >= 1) {
      problem.constraints.max_zero_run = max_zero_run;
    }
    problem.taps = cfg.diffusion.taps;
    if (strategy == "exhaustive") {
      problem.strategy = DesignStrategy::Exhaustive;
    } else if (strategy == "local-search") {
      problem.strategy = DesignStrategy::LocalSearch;
    } else {
      throw std::invalid_argument("unknown strategy: " + strategy);
    }
    problem.seed = seed_given ? seed : cfg.seed;
    const DesignResult result = design(problem);
    for (std::size_t i = 0; i < result.sequences.size(); ++i) {
      std::cout << "x" << (i + 1) << "=" << result.sequences[i].str() << '\n';
    }
    for (Index j = 0; j < result.crbs.size(); ++j) {
      std::cout << "crb" << (j + 1) << "=" << format_real(result.crbs[j])
                << '\n';
    }
    std::cout << "objective=" << format_real(result.objective)
              << " evaluations=" << result.evaluations << '\n';
    return 0;
  }

  if (sim->parsed()) {
    const ExperimentConfig cfg = load_experiment(config_path);
    if (cfg.sequences.empty()) {
      throw std::invalid_argument(
          "simulate: config must list the training sequences");
    }
    const int k_total = sim_k > 0 ? sim_k : cfg.base_length;
    if (k_total % cfg.base_length != 0) {
      throw std::invalid_argument(
          "simulate: --k must be a multiple of the base sequence length");
    }
    std::vector<TrainingSequence> seqs;
    for (const TrainingSequence& s : cfg.sequences) {
      seqs.push_back(concatenate(s, k_total / cfg.base_length));
    }
    const int taps = cfg.diffusion.taps;
    const Mat design_matrix = build_design_matrix(seqs, taps);
    const CirMatrix cir = build_cir(cfg.topology, cfg.diffusion, cfg.noise);
    RngStream rng(seed_given ? seed : cfg.seed, 0);
    const CountMat counts =
        sample_observations(mean_observations(design_matrix, cir), rng);

    std::ofstream out(out_path);
    if (!out) {
      throw std::runtime_error("simulate: cannot open " + out_path);
    }
    out << "k,receiver,count\n";
    for (Index row = 0; row < counts.rows(); ++row) {
      for (Index j = 0; j < counts.cols(); ++j) {
        out << (taps + row) << ',' << (j + 1) << ',' << counts(row, j) << '\n';
      }
    }
    std::cout << "wrote " << counts.rows() * counts.cols()
              << " observations to " << out_path << '\n';
    return 0;
  }

  if (est->parsed()) {
    const ExperimentConfig cfg = load_experiment(config_path);
    if (cfg.sequences.empty()) {
      throw std::invalid_argument(
          "estimate: config must list the training sequences that were sent");
    }
    const int taps = cfg.diffusion.taps;
    const CountMat counts =
        read_observations(obs_path, cfg.topology.links(), taps);
    const int k_total =
        static_cast<int>(counts.rows()) + taps - 1;
    if (k_total % cfg.base_length != 0) {
      throw std::invalid_argument(
          "estimate: observation length is not a multiple of the sequence "
          "length");
    }
    std::vector<TrainingSequence> seqs;
    for (const TrainingSequence& s : cfg.sequences) {
      seqs.push_back(concatenate(s, k_total / cfg.base_length));
    }
    const Mat design_matrix = build_design_matrix(seqs, taps);
    const Mat counts_real = counts.cast<Real>();

    const Mat ls_raw = ls_solve(design_matrix, counts_real);
    std::cout << "estimator,receiver,tap,transmitter_or_noise,value\n";
    const int m = cfg.topology.links();
    CirMatrix ml_cir;
    ml_cir.values.resize(design_matrix.rows(), m);
    CirMatrix ls_cir;
    ls_cir.values = ls_raw.cwiseMax(0.0);
    for (int j = 0; j < m; ++j) {
      const Estimate ml = ml_estimate(Vec(counts_real.col(j)), design_matrix,
                                      ml_init_from_ls(ls_raw.col(j)));
      ml_cir.values.col(j) = ml.cir;
    }
    const std::pair<const char*, const CirMatrix*> outputs[] = {
        {"ls", &ls_cir}, {"ml", &ml_cir}};
    for (const auto& [name, cir] : outputs) {
      for (int j = 0; j < m; ++j) {
        for (int lag = 0; lag < taps; ++lag) {
          for (int i = 0; i < m; ++i) {
            std::cout << name << ',' << (j + 1) << ',' << lag << ','
                      << (i + 1) << ',' << format_real(cir->tap(i, j, lag))
                      << '\n';
          }
        }
        std::cout << name << ',' << (j + 1) << ",,noise,"
                  << format_real(cir->noise(j)) << '\n';
      }
    }
    // Plug-in CRB at the ML estimate (the realized channel is unknown here).
    for (int j = 0; j < m; ++j) {
      std::cout << "crb," << (j + 1) << ",,,"
                << format_real(crb(design_matrix, ml_cir.values.col(j)))
                << '\n';
    }
    return 0;
  }

  if (crb_cmd->parsed()) {
    const ExperimentConfig cfg = load_experiment(config_path);
    const std::vector<TrainingSequence> seqs = parse_sequence_list(seq_arg);
    const CirMatrix nominal =
        build_cir(cfg.topology, cfg.diffusion, cfg.noise);
    const Vec crbs = evaluate_design(seqs, nominal, cfg.diffusion.taps);
    std::cout << "receiver,crb\n";
    for (Index j = 0; j < crbs.size(); ++j) {
      std::cout << (j + 1) << ',' << format_real(crbs[j]) << '\n';
    }
    return 0;
  }

  if (mc->parsed()) {
    ExperimentConfig cfg = load_experiment(config_path);
    if (trials > 0) {
      cfg.trials = trials;
    }
    if (seed_given) {
      cfg.seed = seed;
    }
    if (threads > 0) {
      cfg.threads = threads;
    }
    const MseCurve curve = run_montecarlo(cfg);
    emit_csv(curve, out_path);
    std::cout << "wrote " << curve.rows.size() << " rows to " << out_path
              << '\n';
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "dmimo: " << e.what() << '\n';
    return 1;
  }
}
