// SPDX-License-Identifier: Apache-2.0
#include "dmimo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dmimo {

namespace {

constexpr Real kMeanGuard = 1e-12;

// Projected score residual: for interior entries the plain |gradient|, for
// entries at the boundary only a positive (ascent) gradient counts.
Real kkt_residual(const Vec& cir, const Vec& grad) {
  const Real active = 1e-12 * std::max(cir.maxCoeff(), Real(1));
  Real res = 0.0;
  for (Index i = 0; i < cir.size(); ++i) {
    const Real g = cir[i] > active ? std::abs(grad[i]) : std::max(grad[i], 0.0);
    res = std::max(res, g);
  }
  return res;
}

}  // namespace

Mat ls_solve(const Mat& design, const Mat& observations) {
  if (design.cols() != observations.rows()) {
    throw std::invalid_argument(
        "ls_solve: design and observation dimensions disagree");
  }
  const Mat gram = design * design.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw SingularityError("ls_solve: eigenvalue decomposition failed");
  }
  const Vec& eig = solver.eigenvalues();
  const Real cond =
      eig[0] > 0.0 ? eig[eig.size() - 1] / eig[0]
                   : std::numeric_limits<Real>::infinity();
  if (!(eig[0] > 0.0) || cond > 1e12) {
    std::ostringstream msg;
    msg << "ls_solve: design matrix of shape " << design.rows() << "x"
        << design.cols() << " is rank deficient or ill-conditioned (cond "
        << cond << ")";
    throw SingularityError(msg.str());
  }

  Eigen::LDLT<Mat> ldlt(gram);
  const Mat rhs = design * observations;
  Mat solution = ldlt.solve(rhs);
  solution += ldlt.solve(rhs - gram * solution);
  return solution;
}

std::vector<Estimate> ls_estimate(const Mat& design, const Mat& observations) {
  const Mat raw = ls_solve(design, observations);
  const Mat gram = design * design.transpose();
  const Mat rhs = design * observations;
  const Mat residual = rhs - gram * raw;

  std::vector<Estimate> estimates;
  estimates.reserve(static_cast<std::size_t>(raw.cols()));
  for (Index j = 0; j < raw.cols(); ++j) {
    Estimate est;
    est.cir = raw.col(j).cwiseMax(0.0);
    est.iterations = 1;
    est.converged = true;
    est.final_gradient_norm = residual.col(j).cwiseAbs().maxCoeff();
    estimates.push_back(std::move(est));
  }
  return estimates;
}

std::vector<Estimate> ls_estimate(const Mat& design,
                                  const CountMat& observations) {
  return ls_estimate(design, observations.cast<Real>().eval());
}

Vec ml_init_from_ls(const Vec& ls_column) {
  const Real floor_value = 1e-3 * std::max(ls_column.maxCoeff(), Real(1));
  return ls_column.cwiseMax(floor_value);
}

Estimate ml_estimate(const Vec& counts, const Mat& design, const Vec& init,
                     Real tol, int max_iter, std::vector<Vec>* iterate_trace) {
  if (design.rows() != init.size() || design.cols() != counts.size()) {
    throw std::invalid_argument("ml_estimate: dimensions disagree");
  }
  if (!(init.minCoeff() > 0.0)) {
    throw std::invalid_argument("ml_estimate: init must be strictly positive");
  }
  if (!(tol > 0.0) || max_iter < 1) {
    throw std::invalid_argument("ml_estimate: bad tolerance or max_iter");
  }
  if ((counts.array() < 0.0).any()) {
    throw std::invalid_argument("ml_estimate: negative count");
  }

  const Vec colsum = design.rowwise().sum();
  Vec c = init;
  Vec mu(design.cols());
  Vec ratio(design.cols());
  Vec weighted(design.rows());

  if (iterate_trace) {
    iterate_trace->push_back(c);
  }

  Estimate est;
  for (est.iterations = 0; est.iterations < max_iter;) {
    mu.noalias() = design.transpose() * c;
    for (Index k = 0; k < mu.size(); ++k) {
      ratio[k] =
          counts[k] > 0.0 ? counts[k] / std::max(mu[k], kMeanGuard) : 0.0;
    }
    weighted.noalias() = design * ratio;

    const Real residual = kkt_residual(c, weighted - colsum);
    if (residual <= tol) {
      est.converged = true;
      est.final_gradient_norm = residual;
      est.cir = c;
      return est;
    }

    const Real scale = std::max(c.cwiseAbs().maxCoeff(), Real(1e-300));
    Real change = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
      const Real next =
          colsum[i] > 0.0 ? c[i] * weighted[i] / colsum[i] : c[i];
      change = std::max(change, std::abs(next - c[i]));
      c[i] = next;
    }
    ++est.iterations;
    if (iterate_trace) {
      iterate_trace->push_back(c);
    }
    if (change < tol * scale) {
      est.converged = true;
      break;
    }
  }

  // Fresh projected-score residual at the returned point.
  mu.noalias() = design.transpose() * c;
  for (Index k = 0; k < mu.size(); ++k) {
    ratio[k] = counts[k] > 0.0 ? counts[k] / std::max(mu[k], kMeanGuard) : 0.0;
  }
  weighted.noalias() = design * ratio;
  est.final_gradient_norm = kkt_residual(c, weighted - colsum);
  est.cir = std::move(c);
  return est;
}

Estimate ml_estimate(const CountVec& counts, const Mat& design,
                     const Vec& init, Real tol, int max_iter,
                     std::vector<Vec>* iterate_trace) {
  return ml_estimate(counts.cast<Real>().eval(), design, init, tol, max_iter,
                     iterate_trace);
}

}  // namespace dmimo
