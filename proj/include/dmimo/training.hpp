// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmimo/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dmimo {

/// Binary training sequence for one transmitter, stored as 0/1 bytes.
/// Serializes as a plain bit-string, e.g. "1110000101011001".
struct TrainingSequence {
  std::vector<std::uint8_t> bits;

  int length() const { return static_cast<int>(bits.size()); }
  int ones() const;
  int longest_zero_run() const;

  static TrainingSequence parse(std::string_view bitstring);
  std::string str() const;

  bool operator==(const TrainingSequence&) const = default;
  /// Lexicographic order on the bit-string.
  bool operator<(const TrainingSequence& other) const {
    return bits < other.bits;
  }
};

/// Feasibility limits on a training sequence: a molecule budget (ones count)
/// and a cap on how long a transmitter may stay silent.
struct SequenceConstraints {
  int max_ones = 0;
  int max_zero_run = 4;

  /// Defaults for a given length: at most length/2 ones, zero runs of at
  /// most 4 symbols.
  static SequenceConstraints defaults(int length) {
    return {length / 2, 4};
  }
};

/// True iff the sequence stays within the ones budget and never has a run of
/// zeros longer than allowed.
bool validate_sequence(const TrainingSequence& seq,
                       const SequenceConstraints& constraints);

/// Repeats the sequence end to end. New runs can form at the seams, so
/// feasibility must be re-checked on the result.
TrainingSequence concatenate(const TrainingSequence& seq, int times);

/// Stacked convolution matrix of the M sequences, shape (M*L+1) x (K-L+1).
/// Column k (for k = L..K, 1-based) is [x(k); x(k-1); ...; x(k-L+1); 1] with
/// x(k) the length-M vector of symbols at time k; only columns with a full
/// tap history are formed.
Mat build_design_matrix(const std::vector<TrainingSequence>& sequences,
                        int taps);

}  // namespace dmimo
