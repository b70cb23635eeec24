#include "unirec/error.hpp"
#include "unirec/model.hpp"
#include "unirec/theory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace unirec;

namespace {

int count_nonzeros(const Eigen::VectorXd &v) {
  int c = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) c += v(i) != 0.0;
  return c;
}

Eigen::VectorXd as_vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

} // namespace

TEST(GenerateTruth, SparseVectorHasExactlyKNonzeros) {
  auto rng = make_rng(1);
  auto t = generate_truth(SparseVector{10, 3}, rng);
  EXPECT_EQ(t.dim(), 10);
  EXPECT_EQ(count_nonzeros(t.values), 3);
}

TEST(GenerateTruth, LowRankIsPsdWithRankR) {
  auto rng = make_rng(2);
  auto t = generate_truth(LowRankPsd{5, 1}, rng);
  ASSERT_EQ(t.dim(), 25);
  Eigen::MatrixXd X = devectorize(t.values, 5);
  EXPECT_LE((X - X.transpose()).norm(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  int rank = 0;
  for (int i = 0; i < 5; ++i) rank += es.eigenvalues()(i) > 1e-9 * es.eigenvalues().maxCoeff();
  EXPECT_EQ(rank, 1);
  EXPECT_FALSE(invariant_violation(t).has_value());
}

TEST(GenerateTruth, KLargerThanNIsRejected) {
  auto rng = make_rng(3);
  EXPECT_THROW(generate_truth(SparseVector{10, 11}, rng), ParameterError);
  EXPECT_THROW(generate_truth(LowRankPsd{4, 5}, rng), ParameterError);
  EXPECT_THROW(generate_truth(SparseVector{0, 0}, rng), ParameterError);
  EXPECT_THROW(generate_truth(SparseSymmetric{4, 17, false}, rng), ParameterError);
}

TEST(GenerateTruth, InvariantsHoldOverManySeeds) {
  const std::vector<TruthKind> kinds = {
      SparseVector{20, 4},           LowRankPsd{6, 2},
      SparseSymmetric{6, 5, false},  SparseSymmetric{6, 7, true},
      SparseSymmetric{5, 25, false}, SparseLowRankPsd{8, 3, 2},
  };
  for (const auto &kind : kinds) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      auto rng = make_rng(derive_seed(seed, {7}));
      auto t = generate_truth(kind, rng);
      auto bad = invariant_violation(t);
      ASSERT_FALSE(bad.has_value()) << truth_name(kind) << " seed " << seed << ": " << *bad;
    }
  }
}

TEST(GenerateTruth, SparseSymmetricCountsOffDiagonalPairsTwice) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto rng = make_rng(seed);
    auto t = generate_truth(SparseSymmetric{12, 14, false}, rng);
    Eigen::MatrixXd X = devectorize(t.values, 12);
    EXPECT_EQ(count_nonzeros(t.values), 14);
    EXPECT_EQ((X - X.transpose()).norm(), 0.0);
  }
}

TEST(GenerateTruth, SupportIsUniform) {
  // Each index should be covered with frequency k/n. The per-index bound is
  // Bonferroni-widened so the whole family has the false-alarm rate of 3 sigma.
  const int n = 256, k = 26, draws = 10000;
  std::vector<int> hits(n, 0);
  auto rng = make_rng(20240611);
  for (int d = 0; d < draws; ++d) {
    auto t = generate_truth(SparseVector{n, k}, rng);
    for (int i = 0; i < n; ++i) hits[static_cast<std::size_t>(i)] += t.values(i) != 0.0;
  }
  const double p = static_cast<double>(k) / n;
  const double sigma = std::sqrt(p * (1 - p) / draws);
  const double z = q_inverse(q_function(3.0) / n);
  for (int i = 0; i < n; ++i)
    EXPECT_NEAR(hits[static_cast<std::size_t>(i)] / static_cast<double>(draws), p, z * sigma) << "index " << i;
}

TEST(GenerateTruth, SameSeedSameTruth) {
  auto a = make_rng(99), b = make_rng(99);
  EXPECT_EQ(generate_truth(SparseLowRankPsd{10, 4, 2}, a).values,
            generate_truth(SparseLowRankPsd{10, 4, 2}, b).values);
}

TEST(Vectorize, RowMajorRoundTrip) {
  Eigen::MatrixXd X(2, 3);
  X << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(vectorize(X), as_vec({1, 2, 3, 4, 5, 6}));
  Eigen::MatrixXd S = Eigen::MatrixXd::Random(5, 5);
  EXPECT_EQ(devectorize(vectorize(S), 5), S);
}

TEST(Penalty, Values) {
  EXPECT_DOUBLE_EQ(penalty_value(L1{}, as_vec({1, -2, 0.5}), 3), 3.5);
  Eigen::VectorXd x = vectorize(Eigen::MatrixXd(Eigen::Matrix2d{{2, -1}, {-1, 3}}));
  EXPECT_DOUBLE_EQ(penalty_value(TracePsd{}, x, 2), 5.0);
  EXPECT_DOUBLE_EQ(penalty_value(L1Matrix{}, x, 2), 7.0);
  EXPECT_DOUBLE_EQ(penalty_value(L1PlusTracePsd{0.5}, x, 2), 9.5);
  EXPECT_THROW(validate(PenaltySpec{L1PlusTracePsd{-1}}), ParameterError);
}

TEST(Problem, MakeProblemBuildsExactMeasurements) {
  auto rng = make_rng(5);
  auto truth = generate_truth(SparseVector{8, 2}, rng);
  auto op = sample_operator(GaussianIid{8}, 5, 11);
  auto prob = make_problem(op, truth, L1{});
  EXPECT_LE((prob.y - op.rows * truth.values).norm(), 1e-15);
  EXPECT_THROW(make_problem(op, truth, TracePsd{}), ParameterError);
  EXPECT_THROW(make_problem(sample_operator(GaussianIid{9}, 5, 11), truth, L1{}), ParameterError);
}

TEST(Problem, RelativeError) {
  EXPECT_DOUBLE_EQ(relative_error(as_vec({1, 0}), as_vec({1, 0})), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(as_vec({0, 0}), as_vec({3, 4})), 1.0);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.rho = 0;
  EXPECT_THROW(cfg.validate(), ParameterError);
  cfg = {};
  cfg.max_iter = 0;
  EXPECT_THROW(cfg.validate(), ParameterError);
}
