// SPDX-License-Identifier: Apache-2.0
#include "dmimo/channel.hpp"

#include <stdexcept>

namespace dmimo {

Mat mean_observations(const Mat& design, const CirMatrix& cir) {
  if (design.rows() != cir.values.rows()) {
    throw std::invalid_argument(
        "mean_observations: design and CIR dimensions disagree");
  }
  return design.transpose() * cir.values;
}

CountMat sample_observations(const Mat& means, RngStream& rng) {
  if ((means.array() < 0.0).any()) {
    throw std::invalid_argument("sample_observations: negative mean");
  }
  CountMat counts(means.rows(), means.cols());
  for (Index k = 0; k < means.rows(); ++k) {
    for (Index j = 0; j < means.cols(); ++j) {
      counts(k, j) = rng.next_poisson(means(k, j));
    }
  }
  return counts;
}

}  // namespace dmimo
