// SPDX-License-Identifier: Apache-2.0
#include "dmimo/training.hpp"

#include <algorithm>
#include <stdexcept>

namespace dmimo {

int TrainingSequence::ones() const {
  int n = 0;
  for (std::uint8_t b : bits) {
    n += b;
  }
  return n;
}

int TrainingSequence::longest_zero_run() const {
  int longest = 0;
  int run = 0;
  for (std::uint8_t b : bits) {
    run = b == 0 ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  return longest;
}

TrainingSequence TrainingSequence::parse(std::string_view bitstring) {
  if (bitstring.empty()) {
    throw std::invalid_argument("training sequence must not be empty");
  }
  TrainingSequence seq;
  seq.bits.reserve(bitstring.size());
  for (char c : bitstring) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("training sequence must contain only 0/1: " +
                                  std::string(bitstring));
    }
    seq.bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return seq;
}

std::string TrainingSequence::str() const {
  std::string s;
  s.reserve(bits.size());
  for (std::uint8_t b : bits) {
    s.push_back(static_cast<char>('0' + b));
  }
  return s;
}

bool validate_sequence(const TrainingSequence& seq,
                       const SequenceConstraints& constraints) {
  return seq.ones() <= constraints.max_ones &&
         seq.longest_zero_run() <= constraints.max_zero_run;
}

TrainingSequence concatenate(const TrainingSequence& seq, int times) {
  if (times < 1) {
    throw std::invalid_argument("concatenate: times must be at least 1");
  }
  TrainingSequence out;
  out.bits.reserve(seq.bits.size() * static_cast<std::size_t>(times));
  for (int i = 0; i < times; ++i) {
    out.bits.insert(out.bits.end(), seq.bits.begin(), seq.bits.end());
  }
  return out;
}

Mat build_design_matrix(const std::vector<TrainingSequence>& sequences,
                        int taps) {
  if (sequences.empty()) {
    throw std::invalid_argument("build_design_matrix: no sequences given");
  }
  if (taps < 1) {
    throw std::invalid_argument("build_design_matrix: taps must be >= 1");
  }
  const int m = static_cast<int>(sequences.size());
  const int k_total = sequences.front().length();
  for (const TrainingSequence& s : sequences) {
    if (s.length() != k_total) {
      throw std::invalid_argument(
          "build_design_matrix: sequences must have equal length");
    }
  }
  if (k_total < taps) {
    throw std::invalid_argument(
        "build_design_matrix: sequences shorter than the channel memory");
  }

  const int cols = k_total - taps + 1;
  Mat design(static_cast<Index>(m) * taps + 1, cols);
  for (int col = 0; col < cols; ++col) {
    // Column col holds symbol time k = taps + col (1-based).
    for (int lag = 0; lag < taps; ++lag) {
      const int sym = taps + col - lag - 1;  // 0-based index of x[k - lag]
      for (int i = 0; i < m; ++i) {
        design(static_cast<Index>(lag) * m + i, col) =
            static_cast<Real>(sequences[i].bits[sym]);
      }
    }
    design(design.rows() - 1, col) = 1.0;
  }
  return design;
}

}  // namespace dmimo
