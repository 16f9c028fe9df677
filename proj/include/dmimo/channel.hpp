// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmimo/cir.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

namespace dmimo {

/// Mean observation matrix, (K-L+1) x M: entry (k, j) is the expected count
/// at receiver j in sample slot k, i.e. design.transpose() * cir.
Mat mean_observations(const Mat& design, const CirMatrix& cir);

/// Independent Poisson draws around the given means. Entries are sampled in
/// row-major order (sample slot outer, receiver inner), so a fixed stream
/// yields a byte-identical matrix.
CountMat sample_observations(const Mat& means, RngStream& rng);

}  // namespace dmimo
