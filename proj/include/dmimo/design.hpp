// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmimo/cir.hpp"
#include "dmimo/training.hpp"
#include "dmimo/types.hpp"

#include <cstdint>
#include <vector>

namespace dmimo {

enum class DesignStrategy { Exhaustive, LocalSearch };

/// Search problem: pick one feasible sequence of length base_length per
/// transmitter so the receivers' CRBs at the nominal CIR are minimized.
struct DesignProblem {
  CirMatrix nominal;
  int base_length = 16;  ///< K1
  SequenceConstraints constraints = SequenceConstraints::defaults(16);
  int taps = 3;
  DesignStrategy strategy = DesignStrategy::LocalSearch;
  std::uint64_t seed = 0;
};

struct DesignResult {
  std::vector<TrainingSequence> sequences;
  Vec crbs;                      ///< per-receiver CRB at the nominal CIR
  Real objective = 0.0;          ///< max over receivers
  std::int64_t evaluations = 0;  ///< candidate designs scored
};

/// All feasible sequences of the given length in lexicographic bit-string
/// order. Guarded at length 24; larger alphabets need the local search.
std::vector<TrainingSequence> enumerate_feasible(
    int length, const SequenceConstraints& constraints);

/// Per-receiver CRBs of a sequence tuple at the nominal CIR. Throws
/// SingularityError naming the sequences when the design is non-identifying.
Vec evaluate_design(const std::vector<TrainingSequence>& sequences,
                    const CirMatrix& nominal, int taps);

/// Minimizes max_j CRB_j over feasible sequence tuples; ties broken by the
/// CRB sum, then lexicographically. Candidates must additionally stay
/// feasible under concatenation (leading plus trailing zero runs within the
/// limit), since longer training repeats the designed base. Exhaustive
/// search is globally optimal over that set (swap-symmetric 2x2 problems
/// are pruned to unordered pairs); the seeded local search is deterministic
/// with best-improvement bit flips and in-sequence swaps over 50 restarts.
DesignResult design(const DesignProblem& problem);

}  // namespace dmimo
