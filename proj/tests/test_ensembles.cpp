#include "unirec/ensembles.hpp"
#include "unirec/error.hpp"
#include "unirec/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace unirec;

TEST(Ensembles, GaussianShapeAndMoments) {
  auto op = sample_operator(GaussianIid{4}, 3, 1);
  EXPECT_EQ(op.m(), 3);
  EXPECT_EQ(op.N(), 4);

  auto big = sample_operator(GaussianIid{3}, 100000, 2);
  Eigen::VectorXd mu = empirical_mean(big.rows);
  Eigen::MatrixXd S = empirical_covariance(big.rows);
  EXPECT_LE(mu.cwiseAbs().maxCoeff(), 5.0 / std::sqrt(1e5));
  EXPECT_LE((S - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 5.0 * std::sqrt(2.0 / 1e5));
}

TEST(Ensembles, BernoulliRawValuesAndFrequencies) {
  // With M = I the rows are the raw centered, unit-variance entries.
  CenteredBernoulliMixed spec{0.8, Eigen::MatrixXd::Identity(5, 5)};
  auto op = sample_operator(spec, 20000, 3);
  int high = 0;
  for (Eigen::Index i = 0; i < op.rows.size(); ++i) {
    const double v = op.rows.data()[i];
    ASSERT_TRUE(std::abs(v - 0.5) < 1e-15 || std::abs(v + 2.0) < 1e-15) << v;
    high += v > 0;
  }
  const double total = static_cast<double>(op.rows.size());
  EXPECT_NEAR(high / total, 0.8, 3 * std::sqrt(0.8 * 0.2 / total));
}

TEST(Ensembles, ChiSquareRawEntriesAreStandardized) {
  CenteredChiSquareMixed spec{1, Eigen::MatrixXd::Identity(2, 2)};
  auto op = sample_operator(spec, 200000, 4);
  const double mean = op.rows.mean();
  const double var = (op.rows.array() - mean).square().mean();
  // Raw entries are (chi2_1 - 1)/sqrt(2): fourth moment 15.
  EXPECT_NEAR(mean, 0.0, 5 * std::sqrt(1.0 / 400000));
  EXPECT_NEAR(var, 1.0, 5 * std::sqrt(14.0 / 400000));
  EXPECT_GE(op.rows.minCoeff(), -1.0 / std::sqrt(2.0) - 1e-12);
}

TEST(Ensembles, CorrelatedCovarianceMatchesMixing) {
  const Eigen::MatrixXd M = sample_mixing(4, 17);
  const Eigen::MatrixXd target = M * M.transpose();
  const int m = 10000;
  auto op = sample_operator(GaussianCorrelated{M}, m, 5);
  const Eigen::MatrixXd S = empirical_covariance(op.rows);
  const double scale = target.cwiseAbs().maxCoeff();
  EXPECT_LE((S - target).cwiseAbs().maxCoeff(), 5 * scale / std::sqrt(m));
}

TEST(Ensembles, MixedEnsemblesShareCovariance) {
  const Eigen::MatrixXd M = sample_mixing(4, 23);
  auto dev = second_moment_match(CenteredBernoulliMixed{0.8, M}, CenteredChiSquareMixed{1, M}, 100000, 9);
  const double scale = (M * M.transpose()).cwiseAbs().maxCoeff();
  EXPECT_LE(dev.mean, 0.05 * std::sqrt(scale));
  EXPECT_LE(dev.covariance, 0.05 * scale);
}

TEST(Ensembles, WignerRowsAreSymmetricWithDiagonalVariance2) {
  const int n = 4, m = 20000;
  auto op = sample_operator(WignerSurrogate{n}, m, 6);
  ASSERT_EQ(op.N(), 16);
  for (int r = 0; r < 5; ++r) {
    const Eigen::RowVectorXd row = op.rows.row(r);
    Eigen::Map<const Eigen::Matrix4d> H(row.data());
    EXPECT_EQ((H - H.transpose()).norm(), 0.0);
  }
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd d = op.rows.col(i * n + i);
    EXPECT_NEAR(d.mean(), 1.0, 5 * std::sqrt(2.0 / m));
    EXPECT_NEAR((d.array() - d.mean()).square().mean(), 2.0, 0.2);
  }
  Eigen::VectorXd off = op.rows.col(1);
  EXPECT_NEAR((off.array() - off.mean()).square().mean(), 1.0, 0.1);
}

TEST(Ensembles, QuadraticRowsAreRankOne) {
  auto op = sample_operator(QuadraticGaussian{5}, 3, 7);
  for (int r = 0; r < 3; ++r) {
    const Eigen::RowVectorXd row = op.rows.row(r);
    Eigen::MatrixXd A = Eigen::Map<const Eigen::MatrixXd>(row.data(), 5, 5);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    EXPECT_GE(es.eigenvalues()(0), -1e-10);
    EXPECT_NEAR(es.eigenvalues()(3), 0.0, 1e-10);
  }
}

TEST(Ensembles, QuadraticAndWignerMatchFirstTwoMoments) {
  auto dev = second_moment_match(QuadraticGaussian{4}, WignerSurrogate{4}, 100000, 8);
  // Largest per-entry variance is 2 on the diagonal, 8 for the diagonal covariance.
  EXPECT_LE(dev.mean, 3 * std::sqrt(2 * 2.0 / 1e5) * 1.5);
  EXPECT_LE(dev.covariance, 0.2);
}

TEST(Ensembles, SameSeedSameOperator) {
  const Eigen::MatrixXd M = sample_mixing(6, 1);
  auto a = sample_operator(CenteredChiSquareMixed{1, M}, 7, 42);
  auto b = sample_operator(CenteredChiSquareMixed{1, M}, 7, 42);
  auto c = sample_operator(CenteredChiSquareMixed{1, M}, 7, 43);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_NE(a.rows, c.rows);
}

TEST(Ensembles, InvalidSpecsAreRejected) {
  EXPECT_THROW(sample_operator(GaussianIid{0}, 3, 1), ParameterError);
  EXPECT_THROW(sample_operator(GaussianIid{3}, 0, 1), ParameterError);
  EXPECT_THROW(sample_operator(CenteredBernoulliMixed{1.0, Eigen::MatrixXd::Identity(2, 2)}, 3, 1),
               ParameterError);
  EXPECT_THROW(sample_operator(GaussianCorrelated{Eigen::MatrixXd::Ones(2, 3)}, 3, 1), ParameterError);
  EXPECT_THROW(second_moment_match(GaussianIid{4}, QuadraticGaussian{4}, 100, 1), ParameterError);
}

TEST(Diagnose, GaussianPowerRatio) {
  auto d = diagnose(GaussianIid{256}, 10000, 11);
  EXPECT_GE(256 * d.power_ratio, 1.6);
  EXPECT_LE(256 * d.power_ratio, 2.4);
  EXPECT_LE(d.mean_ratio, 3 * d.mean_ratio_se);
  EXPECT_EQ(d.n, 256);
  EXPECT_EQ(d.m, 10000);
}

TEST(Diagnose, WignerMeanRatio) {
  // ||vec I||^2 / E||vec H||^2 = n / (n^2 + n).
  auto d = diagnose(WignerSurrogate{16}, 5000, 12);
  EXPECT_NEAR(d.mean_ratio, 1.0 / 17, 0.2 / 17);
}

TEST(Diagnose, NeedsThirtyRows) { EXPECT_THROW(diagnose(GaussianIid{4}, 29, 1), ParameterError); }
