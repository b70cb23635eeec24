#include "unirec/error.hpp"
#include "unirec/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace unirec;

namespace {

Eigen::VectorXd as_vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Minimizer of a convex scalar function: coarse grid, then golden section.
double scalar_argmin(const std::function<double(double)> &f, double lo, double hi) {
  const int steps = 6000;
  double best = lo, fbest = f(lo);
  for (int i = 1; i <= steps; ++i) {
    const double z = lo + (hi - lo) * i / steps;
    if (const double fz = f(z); fz < fbest) fbest = fz, best = z;
  }
  const double h = (hi - lo) / steps;
  double a = std::max(lo, best - h), b = std::min(hi, best + h);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) < f(d))
      b = d;
    else
      a = c;
  }
  return (a + b) / 2;
}

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  auto op = sample_operator(GaussianIid{n * n}, 1, seed);
  Eigen::MatrixXd G = Eigen::Map<const Eigen::MatrixXd>(op.rows.data(), n, n);
  return (G + G.transpose()) / 2;
}

} // namespace

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(as_vec({3, -0.5, 1}), 1), as_vec({2, 0, 0}));
  EXPECT_EQ(soft_threshold(as_vec({-4}), 1.5), as_vec({-2.5}));
  EXPECT_EQ(soft_threshold(as_vec({1, -2}), 0), as_vec({1, -2}));
  EXPECT_THROW(soft_threshold(as_vec({1}), -1), ParameterError);
}

TEST(SoftThreshold, MatchesScalarProxOracle) {
  auto rng = make_rng(3);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const double v = 2 * g(rng), t = u(rng);
    const double z = scalar_argmin([&](double z) { return t * std::abs(z) + 0.5 * (z - v) * (z - v); },
                                   v - 3, v + 3);
    EXPECT_NEAR(soft_threshold(as_vec({v}), t)(0), z, 1e-6);
  }
}

TEST(Eigh, AnalyticTwoByTwo) {
  Eigen::MatrixXd S{{2, 1}, {1, 2}};
  auto e = eigh(S);
  EXPECT_NEAR(e.values(0), 3, 1e-14);
  EXPECT_NEAR(e.values(1), 1, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1 / std::sqrt(2.0), 1e-14);
}

TEST(Eigh, ReconstructsRandomSymmetric) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Eigen::MatrixXd S = random_symmetric(8, seed);
    auto e = eigh(S);
    for (int i = 1; i < 8; ++i) EXPECT_GE(e.values(i - 1), e.values(i));
    EXPECT_LE((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - S).norm(), 1e-12 * S.norm());
    EXPECT_LE((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(8, 8)).norm(), 1e-12);
  }
  EXPECT_THROW(eigh(Eigen::MatrixXd{{1, 2}, {0, 1}}), ParameterError);
}

TEST(ProjectPsd, Examples) {
  Eigen::MatrixXd D{{1, 0}, {0, -1}};
  EXPECT_LE((project_psd(D) - Eigen::MatrixXd{{1, 0}, {0, 0}}).norm(), 1e-15);
  Eigen::MatrixXd P = 3 * Eigen::MatrixXd::Identity(3, 3);
  EXPECT_LE((project_psd(P) - P).norm(), 1e-14);
  EXPECT_LE(project_psd(-P).norm(), 1e-14);
}

TEST(ProjectPsd, MatchesClosedFormTwoByTwo) {
  auto rng = make_rng(4);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const double a = g(rng), b = g(rng), c = g(rng);
    const double mid = (a + c) / 2, rad = std::hypot((a - c) / 2, b);
    const double lp = mid + rad, lm = mid - rad;
    Eigen::MatrixXd X{{a, b}, {b, c}};
    Eigen::MatrixXd expected;
    if (lm >= 0)
      expected = X;
    else if (lp <= 0)
      expected = Eigen::MatrixXd::Zero(2, 2);
    else // lp times the spectral projector (X - lm I)/(lp - lm)
      expected = lp * (X - lm * Eigen::MatrixXd::Identity(2, 2)) / (lp - lm);
    EXPECT_LE((project_psd(X) - expected).norm(), 1e-12);
  }
}

TEST(ProxTracePsd, ShiftsAndClampsEigenvalues) {
  Eigen::MatrixXd D{{3, 0}, {0, 0.5}};
  EXPECT_LE((prox_trace_psd(D, 1) - Eigen::MatrixXd{{2, 0}, {0, 0}}).norm(), 1e-15);

  // Per eigenvalue the prox solves min_{z>=0} t z + (z - lambda)^2 / 2.
  auto rng = make_rng(5);
  std::uniform_real_distribution<double> u(0, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd S = random_symmetric(4, 100 + trial);
    const double t = u(rng);
    auto e = eigh(S);
    Eigen::VectorXd shrunk(4);
    for (int i = 0; i < 4; ++i) {
      const double lam = e.values(i);
      shrunk(i) = scalar_argmin([&](double z) { return t * z + 0.5 * (z - lam) * (z - lam); }, 0, std::abs(lam) + 3);
    }
    Eigen::MatrixXd expected = e.vectors * shrunk.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((prox_trace_psd(S, t) - expected).norm(), 1e-6);
  }
}

TEST(AffineProjector, Examples) {
  AffineProjector p(Eigen::MatrixXd{{1, 1}}, as_vec({2}));
  EXPECT_LE((p.project(as_vec({0, 0})) - as_vec({1, 1})).norm(), 1e-15);
  EXPECT_LE((p.project(as_vec({2, 0})) - as_vec({2, 0})).norm(), 1e-15);
  EXPECT_FALSE(p.ridge_used());
}

TEST(AffineProjector, MatchesLeastSquaresOracle) {
  auto op = sample_operator(GaussianIid{20}, 6, 8);
  Eigen::VectorXd y = sample_operator(GaussianIid{6}, 1, 9).rows.row(0).transpose();
  AffineProjector p(op.rows, y);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::VectorXd v = sample_operator(GaussianIid{20}, 1, 50 + seed).rows.row(0).transpose();
    Eigen::VectorXd x = p.project(v);
    // v - x must lie in the row space and x must be feasible.
    Eigen::MatrixXd At = op.rows.transpose();
    Eigen::VectorXd w = At.colPivHouseholderQr().solve(v - x);
    EXPECT_LE((At * w - (v - x)).norm(), 1e-10);
    EXPECT_LE((op.rows * x - y).norm(), 1e-10);
    EXPECT_LE(p.relative_residual(x), 1e-12);
    EXPECT_LE((p.project(x) - x).norm(), 1e-12);
  }
}

TEST(AffineProjector, RankDeficientGramUsesRidge) {
  auto op = sample_operator(GaussianIid{20}, 30, 10);
  Eigen::VectorXd x0 = sample_operator(GaussianIid{20}, 1, 11).rows.row(0).transpose();
  AffineProjector p(op.rows, op.rows * x0);
  EXPECT_TRUE(p.ridge_used());
  EXPECT_LE((p.project(Eigen::VectorXd::Zero(20)) - x0).norm(), 1e-5 * x0.norm());
}

TEST(Solve, IdentityOperatorReturnsTruth) {
  auto x = solve(Eigen::MatrixXd::Identity(4, 4), as_vec({1, 0, -2, 0}), L1{}, 4, SolverConfig{});
  EXPECT_EQ(x.status, SolveStatus::Converged);
  EXPECT_LE((x.estimate - as_vec({1, 0, -2, 0})).norm(), 1e-6);
}

TEST(Solve, TwoVariableBasisPursuit) {
  auto x = solve(Eigen::MatrixXd{{1, 2}}, as_vec({2}), L1{}, 2, SolverConfig{});
  EXPECT_EQ(x.status, SolveStatus::Converged);
  EXPECT_NEAR(x.objective, 1.0, 1e-5);
  EXPECT_LE((x.estimate - as_vec({0, 1})).norm(), 1e-5);
}

TEST(Solve, RecoversSparseVectorWithEnoughMeasurements) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto rng = make_rng(seed);
    auto prob = make_problem(sample_operator(GaussianIid{64}, 40, seed + 100),
                             generate_truth(SparseVector{64, 4}, rng), L1{});
    auto sol = solve(prob, SolverConfig{});
    EXPECT_EQ(sol.status, SolveStatus::Converged);
    EXPECT_LE(sol.rel_error, 1e-3);
    EXPECT_LE(sol.constraint_residual, 1e-6);
  }
}

TEST(Solve, ObjectiveNeverExceedsTruthPenalty) {
  // x0 is feasible, so the minimum cannot be larger than f(x0).
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto rng = make_rng(seed);
    auto prob = make_problem(sample_operator(GaussianIid{40}, 10, seed + 200),
                             generate_truth(SparseVector{40, 8}, rng), L1{});
    auto sol = solve(prob, SolverConfig{});
    ASSERT_EQ(sol.status, SolveStatus::Converged);
    EXPECT_LE(sol.objective, penalty_value(L1{}, prob.truth.values, 40) + 1e-4);
  }
}

TEST(Solve, ScaleInvariance) {
  auto rng = make_rng(7);
  auto prob = make_problem(sample_operator(GaussianIid{30}, 15, 300), generate_truth(SparseVector{30, 3}, rng), L1{});
  auto a = solve(prob.op.rows, prob.y, L1{}, 30, SolverConfig{});
  auto b = solve(3.0 * prob.op.rows, 3.0 * prob.y, L1{}, 30, SolverConfig{});
  ASSERT_EQ(a.status, SolveStatus::Converged);
  ASSERT_EQ(b.status, SolveStatus::Converged);
  EXPECT_LE((a.estimate - b.estimate).norm(), 1e-4 * std::max(1.0, a.estimate.norm()));
}

TEST(Solve, MaxItersIsReported) {
  auto rng = make_rng(8);
  auto prob = make_problem(sample_operator(GaussianIid{50}, 20, 400), generate_truth(SparseVector{50, 5}, rng), L1{});
  SolverConfig cfg;
  cfg.max_iter = 3;
  auto sol = solve(prob, cfg);
  EXPECT_EQ(sol.status, SolveStatus::MaxIters);
  EXPECT_EQ(sol.iterations, 3);
}

TEST(Solve, MismatchedDimensionsAreRejected) {
  EXPECT_THROW(solve(Eigen::MatrixXd::Ones(2, 3), as_vec({1}), L1{}, 3, SolverConfig{}), ParameterError);
  EXPECT_THROW(solve(Eigen::MatrixXd::Ones(2, 3), as_vec({1, 1}), TracePsd{}, 3, SolverConfig{}), ParameterError);
}

TEST(Solve, PhaseLiftWignerRankOne) {
  // n = 8, r = 1, m = 4n: at least 18 of 20 recover.
  int ok = 0;
  for (int t = 0; t < 20; ++t) {
    auto rng = make_rng(derive_seed(11, {static_cast<std::uint64_t>(t)}));
    auto prob = make_problem(sample_operator(WignerSurrogate{8}, 32, derive_seed(12, {static_cast<std::uint64_t>(t)})),
                             generate_truth(LowRankPsd{8, 1}, rng), TracePsd{});
    auto sol = solve(prob, SolverConfig{});
    Eigen::MatrixXd X = devectorize(sol.estimate, 8);
    EXPECT_GE(eigh(X).values.minCoeff(), -1e-6);
    ok += sol.rel_error <= 1e-3;
  }
  EXPECT_GE(ok, 18);
}

TEST(Solve, PsdPenaltiesReturnPsdEstimates) {
  const std::vector<PenaltySpec> penalties = {TracePsd{}, L1Matrix{true}, L1PlusTracePsd{0.5}};
  for (const auto &pen : penalties) {
    auto rng = make_rng(9);
    auto prob = make_problem(sample_operator(QuadraticGaussian{6}, 20, 500),
                             generate_truth(SparseLowRankPsd{6, 2, 1}, rng), pen);
    auto sol = solve(prob, SolverConfig{});
    Eigen::MatrixXd X = devectorize(sol.estimate, 6);
    EXPECT_LE((X - X.transpose()).norm(), 1e-12) << penalty_name(pen);
    EXPECT_GE(eigh(X).values.minCoeff(), -1e-6) << penalty_name(pen);
    if (sol.status == SolveStatus::Converged) {
      EXPECT_LE(sol.constraint_residual, 1e-6);
    }
  }
}

TEST(Solve, SparseLowRankRecoveredByCombinedPenalty) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto rng = make_rng(seed);
    auto prob = make_problem(sample_operator(QuadraticGaussian{8}, 40, 600 + seed),
                             generate_truth(SparseLowRankPsd{8, 2, 1}, rng), L1PlusTracePsd{1.0});
    auto sol = solve(prob, SolverConfig{});
    ok += sol.rel_error <= 1e-3;
    EXPECT_LE(sol.objective, penalty_value(prob.penalty, prob.truth.values, 8) + 1e-4);
  }
  EXPECT_GE(ok, 4);
}

TEST(Oracle, Examples) {
  auto r = solve_oracle_l1(Eigen::MatrixXd{{1, 2}}, as_vec({2}));
  EXPECT_NEAR(r.objective, 1.0, 1e-12);
  EXPECT_LE((r.minimizer - as_vec({0, 1})).norm(), 1e-12);
  EXPECT_THROW(solve_oracle_l1(Eigen::MatrixXd::Zero(1, 3), as_vec({1})), DomainError);
  EXPECT_THROW(solve_oracle_l1(Eigen::MatrixXd::Ones(2, 11), as_vec({1, 1})), ParameterError);
}

TEST(Oracle, OneSparseTruthIsOptimal) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto rng = make_rng(seed);
    auto truth = generate_truth(SparseVector{6, 1}, rng);
    auto op = sample_operator(GaussianIid{6}, 4, 700 + seed);
    auto r = solve_oracle_l1(op.rows, op.rows * truth.values);
    EXPECT_NEAR(r.objective, truth.values.lpNorm<1>(), 1e-9);
  }
}

TEST(Oracle, NeverWorseThanFeasiblePoints) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto op = sample_operator(GaussianIid{8}, 5, 800 + seed);
    Eigen::VectorXd x0 = sample_operator(GaussianIid{8}, 1, 900 + seed).rows.row(0).transpose();
    Eigen::VectorXd y = op.rows * x0;
    auto r = solve_oracle_l1(op.rows, y);
    EXPECT_LE((op.rows * r.minimizer - y).norm(), 1e-9);
    AffineProjector p(op.rows, y);
    EXPECT_LE(r.objective, x0.lpNorm<1>() + 1e-12);
    EXPECT_LE(r.objective, p.project(Eigen::VectorXd::Zero(8)).lpNorm<1>() + 1e-12);
    for (std::uint64_t k = 0; k < 3; ++k) {
      Eigen::VectorXd v = sample_operator(GaussianIid{8}, 1, 1000 + 10 * seed + k).rows.row(0).transpose();
      EXPECT_LE(r.objective, p.project(v).lpNorm<1>() + 1e-12);
    }
  }
}

TEST(Oracle, AgreesWithAdmm) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto op = sample_operator(GaussianIid{7}, 4, 1100 + seed);
    Eigen::VectorXd x0 = sample_operator(GaussianIid{7}, 1, 1200 + seed).rows.row(0).transpose();
    Eigen::VectorXd y = op.rows * x0;
    auto r = solve_oracle_l1(op.rows, y);
    auto s = solve(op.rows, y, L1{}, 7, SolverConfig{});
    ASSERT_EQ(s.status, SolveStatus::Converged);
    EXPECT_NEAR(s.objective, r.objective, 1e-5);
  }
}
