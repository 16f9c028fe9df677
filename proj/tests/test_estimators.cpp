// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmimo/channel.hpp"
#include "dmimo/estimators.hpp"
#include "dmimo/harness.hpp"
#include "dmimo/training.hpp"

#include <cmath>
#include <vector>

using namespace dmimo;

namespace {

TrainingSequence random_sequence(int length, RngStream& rng) {
  TrainingSequence seq;
  for (int i = 0; i < length; ++i) {
    seq.bits.push_back(rng.next_double() < 0.5 ? 1 : 0);
  }
  return seq;
}

struct Instance {
  Mat design;
  Vec cir;
  Vec counts;
};

// Random well-posed estimation problem with Poisson counts drawn at cir.
Instance random_instance(RngStream& rng, int m, int taps, int k_total) {
  for (;;) {
    std::vector<TrainingSequence> seqs;
    for (int i = 0; i < m; ++i) {
      seqs.push_back(random_sequence(k_total, rng));
    }
    Instance inst;
    inst.design = build_design_matrix(seqs, taps);
    inst.cir.resize(inst.design.rows());
    for (Index i = 0; i < inst.cir.size(); ++i) {
      inst.cir[i] = 0.5 + 59.5 * rng.next_double();
    }
    const Mat gram = inst.design * inst.design.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    if (!(es.eigenvalues()[0] > 0.0) ||
        es.eigenvalues()[es.eigenvalues().size() - 1] /
                es.eigenvalues()[0] >
            1e6) {
      continue;  // redraw near-degenerate designs
    }
    const Vec means = inst.design.transpose() * inst.cir;
    inst.counts.resize(means.size());
    for (Index k = 0; k < means.size(); ++k) {
      inst.counts[k] = static_cast<Real>(rng.next_poisson(means[k]));
    }
    return inst;
  }
}

}  // namespace

TEST_CASE("log-likelihood: closed forms and edge conventions") {
  // All-zero counts reduce to minus the sum of means.
  Mat design(2, 3);
  design << 1, 0, 1,  //
      1, 1, 1;
  Vec cir(2);
  cir << 5.0, 1.0;
  const Vec zero = Vec::Zero(3);
  CHECK(log_likelihood(zero, design, cir) ==
        doctest::Approx(-(design.transpose() * cir).sum()));

  // Scalar Poisson: -lambda + y ln(lambda), maximized at lambda = y.
  Mat one = Mat::Ones(1, 1);
  Vec y(1);
  y << 3.0;
  Vec lam(1);
  lam << 2.0;
  CHECK(log_likelihood(y, one, lam) ==
        doctest::Approx(-2.0 + 3.0 * std::log(2.0)));
  const Real at3 = log_likelihood(y, one, (Vec(1) << 3.0).finished());
  for (Real probe : {0.5, 1.0, 2.0, 2.9, 3.1, 4.0, 10.0}) {
    CHECK(at3 >= log_likelihood(y, one, (Vec(1) << probe).finished()));
  }

  // Zero mean with zero count contributes nothing; with a positive count the
  // likelihood is -inf.
  Vec zero_cir = Vec::Zero(2);
  CHECK(log_likelihood(zero, design, zero_cir) == 0.0);
  Vec some(3);
  some << 1.0, 0.0, 0.0;
  CHECK(log_likelihood(some, design, zero_cir) ==
        -std::numeric_limits<Real>::infinity());
}

TEST_CASE("log-likelihood matches the Poisson pmf product oracle") {
  RngStream rng(31, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = random_instance(rng, 2, 2, 10);
    const Vec means = inst.design.transpose() * inst.cir;
    // ln prod_k pmf(y_k; mu_k) computed directly, then add back the ln(y!)
    // constant that log_likelihood omits.
    Real oracle = 0.0;
    Real factorials = 0.0;
    for (Index k = 0; k < means.size(); ++k) {
      oracle += inst.counts[k] * std::log(means[k]) - means[k] -
                std::lgamma(inst.counts[k] + 1.0);
      factorials += std::lgamma(inst.counts[k] + 1.0);
    }
    const Real value = log_likelihood(inst.counts, inst.design, inst.cir);
    CHECK(value == doctest::Approx(oracle + factorials).epsilon(1e-12));
  }
}

TEST_CASE("score matches central finite differences of the log-likelihood") {
  RngStream rng(37, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = random_instance(rng, 2, 2, 12);
    // Random interior point, not the truth.
    Vec point(inst.cir.size());
    for (Index i = 0; i < point.size(); ++i) {
      point[i] = 1.0 + 30.0 * rng.next_double();
    }
    const Vec grad = score(inst.counts, inst.design, point);
    for (Index i = 0; i < point.size(); ++i) {
      const Real h = 1e-5 * std::max(point[i], Real(1));
      Vec hi = point;
      Vec lo = point;
      hi[i] += h;
      lo[i] -= h;
      const Real fd = (log_likelihood(inst.counts, inst.design, hi) -
                       log_likelihood(inst.counts, inst.design, lo)) /
                      (2.0 * h);
      CHECK(std::abs(fd - grad[i]) <=
            1e-6 * std::max(std::abs(grad[i]), Real(1)));
    }
  }
}

TEST_CASE("fisher matrix: scalar case, exact symmetry, PSD") {
  // n unit columns: information n / lambda.
  const Mat ones = Mat::Ones(1, 12);
  Vec lam(1);
  lam << 4.0;
  const Mat info = fisher_matrix(ones, lam);
  CHECK(info(0, 0) == doctest::Approx(12.0 / 4.0));

  RngStream rng(41, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const Instance inst = random_instance(rng, 2, 3, 14);
    const Mat fisher = fisher_matrix(inst.design, inst.cir);
    CHECK(fisher == fisher.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(fisher);
    CHECK(es.eigenvalues()[0] >= -1e-10);
  }

  Vec bad = Vec::Zero(ones.rows());
  CHECK_THROWS_AS(fisher_matrix(ones, bad), std::invalid_argument);
}

TEST_CASE("fisher matrix matches the finite-difference Hessian oracle") {
  RngStream rng(43, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const Instance inst = random_instance(rng, 2, 2, 12);
    const Mat fisher = fisher_matrix(inst.design, inst.cir);

    // Expected counts at the evaluation point; the negative Jacobian of the
    // score with those counts is the information matrix.
    const Vec expected = inst.design.transpose() * inst.cir;
    const Index p = inst.cir.size();
    Mat oracle(p, p);
    for (Index j = 0; j < p; ++j) {
      const Real h = 1e-5 * std::max(inst.cir[j], Real(1));
      Vec hi = inst.cir;
      Vec lo = inst.cir;
      hi[j] += h;
      lo[j] -= h;
      oracle.col(j) = -(score(expected, inst.design, hi) -
                        score(expected, inst.design, lo)) /
                      (2.0 * h);
    }
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) {
        const Real scale =
            std::max({std::abs(fisher(i, j)), std::abs(oracle(i, j)), 1e-6});
        CHECK(std::abs(fisher(i, j) - oracle(i, j)) / scale < 1e-6);
      }
    }
  }
}

TEST_CASE("crb: scalar closed form and concatenation halving") {
  Vec lam(1);
  lam << 4.0;
  CHECK(crb(Mat::Ones(1, 8), lam) == doctest::Approx(4.0 / 8.0));
  // Doubling the sample count halves the scalar CRB exactly.
  CHECK(crb(Mat::Ones(1, 16), lam) == 0.5 * crb(Mat::Ones(1, 8), lam));
}

TEST_CASE("crb matches an independent trace-of-inverse oracle") {
  const ExperimentConfig cfg = ExperimentConfig::paper2x2();
  const CirMatrix cir = build_cir(cfg.topology, cfg.diffusion, cfg.noise);
  const Mat design = build_design_matrix(cfg.sequences, cfg.diffusion.taps);
  for (int j = 0; j < 2; ++j) {
    const Vec col = cir.values.col(j);
    Mat info = Mat::Zero(design.rows(), design.rows());
    for (Index k = 0; k < design.cols(); ++k) {
      info += design.col(k) * design.col(k).transpose() / design.col(k).dot(col);
    }
    const Real oracle = info.fullPivLu().inverse().trace();
    CHECK(crb(design, col) == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(crb(design, col) > 0.0);
  }
}

TEST_CASE("crb throws on a non-identifying design") {
  // Identical sequences make the two transmitters indistinguishable.
  const std::vector<TrainingSequence> seqs = {
      TrainingSequence::parse("11010011"), TrainingSequence::parse("11010011")};
  const Mat design = build_design_matrix(seqs, 2);
  const Vec cir = Vec::Constant(design.rows(), 10.0);
  CHECK_THROWS_AS(crb(design, cir), SingularityError);
}

TEST_CASE("ls: exact recovery, square solve, and the SVD oracle") {
  RngStream rng(47, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Instance inst = random_instance(rng, 1 + static_cast<int>(rng.next_u64() % 3),
                                          1 + static_cast<int>(rng.next_u64() % 4),
                                          20 + static_cast<int>(rng.next_u64() % 21));
    const Mat exact = inst.design.transpose() * inst.cir;
    const Mat recovered = ls_solve(inst.design, exact);
    for (Index i = 0; i < inst.cir.size(); ++i) {
      CHECK(std::abs(recovered(i, 0) / inst.cir[i] - 1.0) <= 1e-9);
    }

    // Independent route: SVD least squares on the transposed design.
    Vec noisy(inst.counts.size());
    for (Index k = 0; k < noisy.size(); ++k) {
      noisy[k] = inst.counts[k];
    }
    const Vec ours = ls_solve(inst.design, Mat(noisy)).col(0);
    const Vec oracle = inst.design.transpose()
                           .jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                           .solve(noisy);
    CHECK((ours - oracle).cwiseAbs().maxCoeff() <=
          1e-10 * std::max(Real(1), oracle.cwiseAbs().maxCoeff()));
  }

  // Square invertible design: LS is the direct linear solve.
  Mat design(2, 2);
  design << 1, 0,  //
      1, 1;
  Mat y(2, 1);
  y << 7.0, 3.0;
  const Mat direct = design.transpose().fullPivLu().solve(y);
  CHECK((ls_solve(design, y) - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ls_estimate clamps negatives and flags rank deficiency") {
  Mat design(2, 3);
  design << 1, 0, 1,  //
      1, 1, 1;
  Mat y(3, 1);
  y << 0.0, 5.0, 0.0;  // pulls the first coefficient negative
  const Mat raw = ls_solve(design, y);
  CHECK(raw.col(0).minCoeff() < 0.0);
  const auto estimates = ls_estimate(design, y);
  REQUIRE(estimates.size() == 1);
  CHECK(estimates[0].cir.minCoeff() >= 0.0);
  CHECK(estimates[0].converged);

  // Integer observation matrices take the same path.
  const CountMat counts = y.cast<std::int64_t>();
  const auto from_counts = ls_estimate(design, counts);
  CHECK(from_counts[0].cir == estimates[0].cir);

  // Duplicated transmitter rows are rank deficient.
  const std::vector<TrainingSequence> seqs = {
      TrainingSequence::parse("110100"), TrainingSequence::parse("110100")};
  const Mat degenerate = build_design_matrix(seqs, 2);
  const Mat obs = Mat::Ones(degenerate.cols(), 2);
  CHECK_THROWS_AS(ls_solve(degenerate, obs), SingularityError);
}

TEST_CASE("ls is unbiased at scale (pre-clamping)") {
  const ExperimentConfig cfg = ExperimentConfig::paper2x2();
  const CirMatrix cir = build_cir(cfg.topology, cfg.diffusion, cfg.noise);
  const Mat design = build_design_matrix(cfg.sequences, cfg.diffusion.taps);
  const Mat means = mean_observations(design, cir);

  const int trials = 2000;
  Mat sum = Mat::Zero(cir.values.rows(), cir.values.cols());
  Mat sum_sq = Mat::Zero(cir.values.rows(), cir.values.cols());
  RngStream rng(313, 0);
  for (int t = 0; t < trials; ++t) {
    const Mat counts = sample_observations(means, rng).cast<Real>();
    const Mat raw = ls_solve(design, counts);
    sum += raw;
    sum_sq += raw.cwiseProduct(raw);
  }
  const Mat mean = sum / trials;
  for (Index j = 0; j < mean.cols(); ++j) {
    for (Index i = 0; i < mean.rows(); ++i) {
      const Real var =
          sum_sq(i, j) / trials - mean(i, j) * mean(i, j);
      const Real stderr_mean = std::sqrt(var / trials);
      CHECK(std::abs(mean(i, j) - cir.values(i, j)) <= 3.0 * stderr_mean);
    }
  }
}

TEST_CASE("ml: scalar case returns the sample mean in one step") {
  const Mat design = Mat::Ones(1, 10);
  Vec counts(10);
  counts << 3, 5, 2, 8, 4, 4, 6, 1, 0, 7;
  const Estimate est =
      ml_estimate(counts, design, Vec::Constant(1, 1.0), 1e-12, 100);
  CHECK(est.converged);
  CHECK(est.cir[0] == doctest::Approx(counts.mean()).epsilon(1e-12));
}

TEST_CASE("ml: noiseless integer means are a stationary point") {
  const ExperimentConfig cfg = ExperimentConfig::paper2x2();
  const Mat design = build_design_matrix(cfg.sequences, cfg.diffusion.taps);
  Vec truth(7);
  truth << 60, 42, 9, 9, 4, 4, 18;  // integer channel: X^T c is exact
  const Vec counts = design.transpose() * truth;

  const Mat ls_raw = ls_solve(design, Mat(counts));
  const Estimate est = ml_estimate(counts, design, ml_init_from_ls(ls_raw.col(0)),
                                   1e-10, 100000);
  CHECK(est.converged);
  CHECK(est.final_gradient_norm <= 1e-6);
  for (Index i = 0; i < truth.size(); ++i) {
    CHECK(std::abs(est.cir[i] / truth[i] - 1.0) < 1e-6);
  }
}

TEST_CASE("ml beats 500 random feasible probes") {
  RngStream rng(53, 0);
  const Instance inst = random_instance(rng, 2, 2, 12);

  const Mat ls_raw = ls_solve(inst.design, Mat(inst.counts));
  const Estimate est =
      ml_estimate(inst.counts, inst.design, ml_init_from_ls(ls_raw.col(0)));
  CHECK(est.converged);
  const Real best = log_likelihood(inst.counts, inst.design, est.cir);

  const Real hi = 2.0 * inst.cir.maxCoeff();
  for (int probe = 0; probe < 500; ++probe) {
    Vec point(inst.cir.size());
    for (Index i = 0; i < point.size(); ++i) {
      point[i] = hi * rng.next_double();
    }
    CHECK(best >= log_likelihood(inst.counts, inst.design, point));
  }
}

namespace {

// Extended-precision likelihood oracle, so per-step monotonicity can be
// judged below the double rounding floor of values of magnitude ~1e4.
long double loglik_ld(const Vec& counts, const Mat& design, const Vec& cir) {
  long double total = 0.0L;
  for (Index k = 0; k < design.cols(); ++k) {
    long double mu = 0.0L;
    for (Index i = 0; i < design.rows(); ++i) {
      mu += static_cast<long double>(design(i, k)) *
            static_cast<long double>(cir[i]);
    }
    total -= mu;
    if (counts[k] > 0.0) {
      total += static_cast<long double>(counts[k]) * std::log(mu);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("ml iteration is monotone in log-likelihood") {
  RngStream rng(59, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = random_instance(rng, 2, 3, 16);
    const Mat ls_raw = ls_solve(inst.design, Mat(inst.counts));
    std::vector<Vec> trace;
    ml_estimate(inst.counts, inst.design, ml_init_from_ls(ls_raw.col(0)), 1e-8,
                20000, &trace);
    REQUIRE(trace.size() >= 2);
    long double prev = loglik_ld(inst.counts, inst.design, trace.front());
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const long double now = loglik_ld(inst.counts, inst.design, trace[i]);
      CHECK(static_cast<Real>(now - prev) >= -1e-12);
      prev = now;
    }
  }
}

TEST_CASE("ml stops at max_iter with converged = false") {
  RngStream rng(61, 0);
  const Instance inst = random_instance(rng, 2, 2, 12);
  const Estimate est = ml_estimate(inst.counts, inst.design,
                                   Vec::Constant(inst.cir.size(), 1.0), 1e-14, 2);
  CHECK_FALSE(est.converged);
  CHECK(est.iterations == 2);
  CHECK(est.cir.minCoeff() >= 0.0);
}

TEST_CASE("ml input validation") {
  const Mat design = Mat::Ones(1, 4);
  const Vec counts = Vec::Constant(4, 2.0);
  CHECK_THROWS_AS(
      ml_estimate(counts, design, Vec::Zero(1)), std::invalid_argument);
  CHECK_THROWS_AS(
      ml_estimate(counts, design, Vec::Constant(1, 1.0), -1.0, 10),
      std::invalid_argument);
  const Vec short_counts = Vec::Constant(3, 1.0);
  CHECK_THROWS_AS(ml_estimate(short_counts, design, Vec::Constant(1, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("crb ordering: concatenated designs dominate their base") {
  const ExperimentConfig cfg = ExperimentConfig::paper2x2();
  const CirMatrix cir = build_cir(cfg.topology, cfg.diffusion, cfg.noise);
  for (int reps = 1; reps <= 3; ++reps) {
    std::vector<TrainingSequence> base;
    std::vector<TrainingSequence> doubled;
    for (const TrainingSequence& s : cfg.sequences) {
      base.push_back(concatenate(s, reps));
      doubled.push_back(concatenate(s, 2 * reps));
    }
    const Mat design_base = build_design_matrix(base, cfg.diffusion.taps);
    const Mat design_doubled = build_design_matrix(doubled, cfg.diffusion.taps);
    for (int j = 0; j < 2; ++j) {
      CHECK(crb(design_doubled, cir.values.col(j)) <=
            crb(design_base, cir.values.col(j)));
    }
  }
}
