// SPDX-License-Identifier: Apache-2.0
#include "dmimo/design.hpp"

#include "dmimo/estimators.hpp"
#include "dmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace dmimo {

namespace {

struct Candidate {
  std::vector<TrainingSequence> sequences;
  Vec crbs;
  Real objective = 0.0;
  Real crb_sum = 0.0;
};

// Total order: objective, then CRB sum, then lexicographic on the tuple.
bool better(const Candidate& a, const Candidate& b) {
  if (a.objective != b.objective) {
    return a.objective < b.objective;
  }
  if (a.crb_sum != b.crb_sum) {
    return a.crb_sum < b.crb_sum;
  }
  return a.sequences < b.sequences;
}

std::optional<Candidate> evaluate(const std::vector<TrainingSequence>& seqs,
                                  const CirMatrix& nominal, int taps) {
  Candidate cand;
  cand.sequences = seqs;
  const Mat design = build_design_matrix(seqs, taps);
  cand.crbs.resize(nominal.links());
  for (int j = 0; j < nominal.links(); ++j) {
    try {
      cand.crbs[j] = crb(design, nominal.values.col(j));
    } catch (const SingularityError&) {
      return std::nullopt;
    }
  }
  cand.objective = cand.crbs.maxCoeff();
  cand.crb_sum = cand.crbs.sum();
  return cand;
}

// A designed sequence must stay feasible when the harness repeats it to
// build longer training: interior runs are unchanged and the seam run is
// the trailing plus leading zeros, so bounding that sum keeps every
// repetition count feasible.
bool concatenation_safe(const TrainingSequence& seq,
                        const SequenceConstraints& constraints) {
  if (!validate_sequence(seq, constraints)) {
    return false;
  }
  int lead = 0;
  while (lead < seq.length() && seq.bits[static_cast<std::size_t>(lead)] == 0) {
    ++lead;
  }
  if (lead == seq.length()) {
    return false;
  }
  int trail = 0;
  while (seq.bits[static_cast<std::size_t>(seq.length() - 1 - trail)] == 0) {
    ++trail;
  }
  return lead + trail <= constraints.max_zero_run;
}

// Exact column-swap symmetry of a 2x2 nominal CIR: receiver 2 sees receiver
// 1's channel with the two transmitters exchanged within every tap block.
bool swap_symmetric(const CirMatrix& nominal) {
  if (nominal.links() != 2) {
    return false;
  }
  for (int lag = 0; lag < nominal.taps(); ++lag) {
    if (nominal.tap(0, 0, lag) != nominal.tap(1, 1, lag) ||
        nominal.tap(1, 0, lag) != nominal.tap(0, 1, lag)) {
      return false;
    }
  }
  return nominal.noise(0) == nominal.noise(1);
}

std::vector<TrainingSequence> random_feasible_tuple(
    int links, int length, const SequenceConstraints& constraints,
    RngStream& rng) {
  std::vector<TrainingSequence> seqs(links);
  for (auto& seq : seqs) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      seq.bits.assign(static_cast<std::size_t>(length), 0);
      for (auto& b : seq.bits) {
        b = rng.next_double() < 0.5 ? 1 : 0;
      }
      if (concatenation_safe(seq, constraints)) {
        break;
      }
      seq.bits.clear();
    }
    if (seq.bits.empty()) {
      throw std::runtime_error(
          "design: could not sample a feasible sequence; constraints too "
          "tight");
    }
  }
  return seqs;
}

Candidate exhaustive_search(const DesignProblem& problem,
                            std::int64_t& evaluations) {
  std::vector<TrainingSequence> feasible;
  for (TrainingSequence& seq :
       enumerate_feasible(problem.base_length, problem.constraints)) {
    if (concatenation_safe(seq, problem.constraints)) {
      feasible.push_back(std::move(seq));
    }
  }
  const int m = problem.nominal.links();
  const std::size_t n = feasible.size();
  if (n == 0) {
    throw std::runtime_error("design: feasible sequence set is empty");
  }

  const bool symmetric = swap_symmetric(problem.nominal);
  double combos = symmetric && m == 2
                      ? 0.5 * static_cast<double>(n) * (static_cast<double>(n) + 1)
                      : std::pow(static_cast<double>(n), m);
  if (combos > 1e8) {
    throw std::invalid_argument(
        "design: exhaustive search space too large; use the local-search "
        "strategy");
  }

  std::optional<Candidate> best;
  evaluations = 0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  std::vector<TrainingSequence> tuple(static_cast<std::size_t>(m));
  for (;;) {
    bool skip = false;
    if (symmetric && m == 2 && idx[0] > idx[1]) {
      skip = true;  // (b, a) scores identically to (a, b)
    }
    if (!skip) {
      for (int i = 0; i < m; ++i) {
        tuple[static_cast<std::size_t>(i)] = feasible[idx[static_cast<std::size_t>(i)]];
      }
      ++evaluations;
      auto cand = evaluate(tuple, problem.nominal, problem.taps);
      if (cand && (!best || better(*cand, *best))) {
        best = std::move(cand);
      }
    }
    // Odometer over the tuple, last index fastest: lexicographic order.
    int pos = m - 1;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == n) {
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) {
      break;
    }
  }
  if (!best) {
    throw SingularityError(
        "design: no feasible design with a nonsingular Fisher matrix");
  }
  return std::move(*best);
}

}  // namespace

std::vector<TrainingSequence> enumerate_feasible(
    int length, const SequenceConstraints& constraints) {
  if (length < 1) {
    throw std::invalid_argument("enumerate_feasible: length must be >= 1");
  }
  if (length > 24) {
    throw std::invalid_argument(
        "enumerate_feasible: length too large for exhaustive enumeration; "
        "use the local-search strategy");
  }
  std::vector<TrainingSequence> out;
  const std::uint64_t total = 1ull << length;
  TrainingSequence seq;
  seq.bits.assign(static_cast<std::size_t>(length), 0);
  for (std::uint64_t v = 0; v < total; ++v) {
    for (int i = 0; i < length; ++i) {
      seq.bits[static_cast<std::size_t>(i)] =
          static_cast<std::uint8_t>((v >> (length - 1 - i)) & 1u);
    }
    if (validate_sequence(seq, constraints)) {
      out.push_back(seq);
    }
  }
  return out;
}

Vec evaluate_design(const std::vector<TrainingSequence>& sequences,
                    const CirMatrix& nominal, int taps) {
  if (static_cast<int>(sequences.size()) != nominal.links()) {
    throw std::invalid_argument(
        "evaluate_design: one sequence per transmitter required");
  }
  const Mat design = build_design_matrix(sequences, taps);
  if (design.rows() != nominal.values.rows()) {
    throw std::invalid_argument(
        "evaluate_design: nominal CIR inconsistent with taps");
  }
  Vec crbs(nominal.links());
  for (int j = 0; j < nominal.links(); ++j) {
    try {
      crbs[j] = crb(design, nominal.values.col(j));
    } catch (const SingularityError&) {
      std::ostringstream msg;
      msg << "evaluate_design: singular Fisher matrix at receiver " << (j + 1)
          << " for design";
      for (const auto& s : sequences) {
        msg << " " << s.str();
      }
      throw SingularityError(msg.str());
    }
  }
  return crbs;
}

DesignResult design(const DesignProblem& problem) {
  const int m = problem.nominal.links();
  if (m < 1) {
    throw std::invalid_argument("design: nominal CIR is empty");
  }
  if (problem.taps != problem.nominal.taps()) {
    throw std::invalid_argument(
        "design: taps inconsistent with the nominal CIR");
  }
  if (problem.base_length < problem.taps) {
    throw std::invalid_argument(
        "design: base length must be at least the tap count");
  }

  DesignResult result;

  if (problem.strategy == DesignStrategy::Exhaustive) {
    std::int64_t evaluations = 0;
    Candidate best = exhaustive_search(problem, evaluations);
    result.sequences = std::move(best.sequences);
    result.crbs = std::move(best.crbs);
    result.objective = best.objective;
    result.evaluations = evaluations;
    return result;
  }

  // Seeded local search: best-improvement moves over single-bit flips and
  // in-sequence position swaps, restarted from random feasible tuples.
  constexpr int kRestarts = 50;
  std::optional<Candidate> best;
  std::int64_t evaluations = 0;
  for (int restart = 0; restart < kRestarts; ++restart) {
    RngStream rng(problem.seed, static_cast<std::uint64_t>(restart));
    std::optional<Candidate> current;
    for (int attempt = 0; attempt < 1000 && !current; ++attempt) {
      auto tuple = random_feasible_tuple(m, problem.base_length,
                                         problem.constraints, rng);
      ++evaluations;
      current = evaluate(tuple, problem.nominal, problem.taps);
    }
    if (!current) {
      continue;
    }
    for (;;) {
      std::optional<Candidate> step_best;
      auto consider = [&](const std::vector<TrainingSequence>& tuple) {
        ++evaluations;
        auto cand = evaluate(tuple, problem.nominal, problem.taps);
        if (cand && (!step_best || better(*cand, *step_best))) {
          step_best = std::move(cand);
        }
      };
      std::vector<TrainingSequence> tuple = current->sequences;
      for (int i = 0; i < m; ++i) {
        auto& bits = tuple[static_cast<std::size_t>(i)].bits;
        for (std::size_t p = 0; p < bits.size(); ++p) {
          bits[p] ^= 1u;
          if (concatenation_safe(tuple[static_cast<std::size_t>(i)],
                                 problem.constraints)) {
            consider(tuple);
          }
          bits[p] ^= 1u;
        }
        for (std::size_t p = 0; p + 1 < bits.size(); ++p) {
          for (std::size_t q = p + 1; q < bits.size(); ++q) {
            if (bits[p] == bits[q]) {
              continue;
            }
            std::swap(bits[p], bits[q]);
            if (concatenation_safe(tuple[static_cast<std::size_t>(i)],
                                   problem.constraints)) {
              consider(tuple);
            }
            std::swap(bits[p], bits[q]);
          }
        }
      }
      if (step_best && better(*step_best, *current)) {
        current = std::move(step_best);
      } else {
        break;
      }
    }
    if (!best || better(*current, *best)) {
      best = std::move(current);
    }
  }
  if (!best) {
    throw SingularityError(
        "design: no feasible design with a nonsingular Fisher matrix");
  }
  result.sequences = std::move(best->sequences);
  result.crbs = std::move(best->crbs);
  result.objective = best->objective;
  result.evaluations = evaluations;
  return result;
}

}  // namespace dmimo
