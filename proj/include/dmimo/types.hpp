// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace dmimo {

using Real = double;
using Index = Eigen::Index;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = MatrixX<Real>;
using Vec = VectorX<Real>;
using CountMat = MatrixX<std::int64_t>;
using CountVec = VectorX<std::int64_t>;
using Vec3 = Eigen::Vector3d;

/// Thrown when a design matrix or Fisher information matrix is numerically
/// singular, i.e. the training design does not identify the channel.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dmimo
