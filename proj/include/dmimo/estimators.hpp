// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmimo/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dmimo {

/// Estimated CIR column for one receiver, entries clamped to >= 0.
struct Estimate {
  Vec cir;
  int iterations = 0;
  bool converged = false;
  /// Max-norm of the projected score at the returned point (for entries at
  /// the nonnegativity boundary only an ascent direction counts).
  Real final_gradient_norm = 0.0;
};

namespace detail {

template <class DerivedX, class DerivedC>
Real column_mean(const Eigen::MatrixBase<DerivedX>& design,
                 const Eigen::MatrixBase<DerivedC>& cir, Index k) {
  Real mu = 0.0;
  for (Index i = 0; i < design.rows(); ++i) {
    mu += static_cast<Real>(design(i, k)) * static_cast<Real>(cir[i]);
  }
  return mu;
}

template <class DerivedY, class DerivedX, class DerivedC>
void check_estimation_dims(const Eigen::MatrixBase<DerivedY>& counts,
                           const Eigen::MatrixBase<DerivedX>& design,
                           const Eigen::MatrixBase<DerivedC>& cir) {
  if (design.rows() != cir.size() || design.cols() != counts.size()) {
    throw std::invalid_argument(
        "estimator: observation/design/CIR dimensions disagree");
  }
}

}  // namespace detail

/// Poisson log-likelihood of one receiver's counts under means design^T*cir,
/// with the count-factorial constant omitted. The k-th term y*ln(mu) is 0
/// when both y and mu vanish; a zero mean with a positive count yields -inf.
template <class DerivedY, class DerivedX, class DerivedC>
Real log_likelihood(const Eigen::MatrixBase<DerivedY>& counts,
                    const Eigen::MatrixBase<DerivedX>& design,
                    const Eigen::MatrixBase<DerivedC>& cir) {
  detail::check_estimation_dims(counts, design, cir);
  // Kahan summation: keeps per-iteration monotonicity checks meaningful at
  // the 1e-12 level.
  Real sum = 0.0;
  Real carry = 0.0;
  for (Index k = 0; k < design.cols(); ++k) {
    const Real mu = detail::column_mean(design, cir, k);
    const Real y = static_cast<Real>(counts[k]);
    Real term;
    if (mu > 0.0) {
      term = -mu + (y > 0.0 ? y * std::log(mu) : 0.0);
    } else if (y > 0.0) {
      return -std::numeric_limits<Real>::infinity();
    } else {
      term = 0.0;
    }
    const Real t = term - carry;
    const Real s = sum + t;
    carry = (s - sum) - t;
    sum = s;
  }
  return sum;
}

/// Score (gradient of the log-likelihood): sum_k [y_k/mu_k - 1] * X[k].
template <class DerivedY, class DerivedX, class DerivedC>
Vec score(const Eigen::MatrixBase<DerivedY>& counts,
          const Eigen::MatrixBase<DerivedX>& design,
          const Eigen::MatrixBase<DerivedC>& cir) {
  detail::check_estimation_dims(counts, design, cir);
  Vec grad = Vec::Zero(design.rows());
  for (Index k = 0; k < design.cols(); ++k) {
    const Real mu = detail::column_mean(design, cir, k);
    const Real y = static_cast<Real>(counts[k]);
    Real w;
    if (y > 0.0) {
      if (!(mu > 0.0)) {
        throw std::invalid_argument("score: zero mean with a positive count");
      }
      w = y / mu - 1.0;
    } else {
      w = -1.0;
    }
    for (Index i = 0; i < design.rows(); ++i) {
      grad[i] += w * static_cast<Real>(design(i, k));
    }
  }
  return grad;
}

/// Fisher information matrix sum_k X[k]*X[k]^T / (X[k]^T cir). Symmetric by
/// construction (lower triangle computed, mirrored exactly).
template <class DerivedX, class DerivedC>
Mat fisher_matrix(const Eigen::MatrixBase<DerivedX>& design,
                  const Eigen::MatrixBase<DerivedC>& cir) {
  if (design.rows() != cir.size()) {
    throw std::invalid_argument("fisher_matrix: dimensions disagree");
  }
  const Index p = design.rows();
  Mat info = Mat::Zero(p, p);
  for (Index k = 0; k < design.cols(); ++k) {
    const Real mu = detail::column_mean(design, cir, k);
    if (!(mu > 0.0)) {
      throw std::invalid_argument(
          "fisher_matrix: nonpositive mean under the given CIR");
    }
    const Real inv_mu = 1.0 / mu;
    for (Index i = 0; i < p; ++i) {
      const Real xi = static_cast<Real>(design(i, k));
      if (xi == 0.0) {
        continue;
      }
      for (Index j = 0; j <= i; ++j) {
        info(i, j) += xi * static_cast<Real>(design(j, k)) * inv_mu;
      }
    }
  }
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < i; ++j) {
      info(j, i) = info(i, j);
    }
  }
  return info;
}

/// Cramer-Rao bound for one receiver: trace of the inverse Fisher matrix.
/// Throws SingularityError when the information matrix does not identify
/// the channel.
template <class DerivedX, class DerivedC>
Real crb(const Eigen::MatrixBase<DerivedX>& design,
         const Eigen::MatrixBase<DerivedC>& cir) {
  const Mat info = fisher_matrix(design, cir);
  Eigen::SelfAdjointEigenSolver<Mat> solver(info);
  if (solver.info() != Eigen::Success) {
    throw SingularityError("crb: eigenvalue decomposition failed");
  }
  const Vec& eig = solver.eigenvalues();  // ascending
  if (!(eig[0] > 0.0) || eig[eig.size() - 1] / eig[0] > 1e14) {
    throw SingularityError(
        "crb: Fisher information matrix is singular; the training design "
        "does not identify the channel");
  }
  return eig.cwiseInverse().sum();
}

/// Unclamped least-squares solution (XX^T)^{-1} X Y for all receivers at
/// once, with one iterative-refinement step on the normal equations.
Mat ls_solve(const Mat& design, const Mat& observations);

/// Least-squares estimates per receiver, negative entries clamped to zero.
std::vector<Estimate> ls_estimate(const Mat& design, const Mat& observations);
std::vector<Estimate> ls_estimate(const Mat& design,
                                  const CountMat& observations);

/// Warm start for the ML iteration from a raw LS column: entries floored at
/// 1e-3 * max(largest LS entry, 1) so the start is strictly positive.
Vec ml_init_from_ls(const Vec& ls_column);

/// Maximum-likelihood estimate for one receiver via the multiplicative
/// fixed-point update
///   c <- c .* (sum_k y_k X[k]/mu_k) ./ (sum_k X[k]),
/// the EM update for Poisson linear models: it preserves nonnegativity and
/// never decreases the likelihood. Stops when the relative parameter change
/// or the projected score drops below tol; exceeding max_iter returns the
/// last iterate with converged = false. When iterate_trace is given, the
/// starting point and every subsequent iterate are recorded.
Estimate ml_estimate(const Vec& counts, const Mat& design, const Vec& init,
                     Real tol = 1e-8, int max_iter = 20000,
                     std::vector<Vec>* iterate_trace = nullptr);
Estimate ml_estimate(const CountVec& counts, const Mat& design,
                     const Vec& init, Real tol = 1e-8, int max_iter = 20000,
                     std::vector<Vec>* iterate_trace = nullptr);

}  // namespace dmimo
