#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>

namespace unirec {

// Measurement vector distributions. The four vector ensembles produce rows of
// length n; the quadratic and Wigner ensembles produce rows vec(.) of length n^2.

struct GaussianIid {
  int n = 0;
};

/// Rows a = M g with g standard normal, so Cov[a] = M M^T.
struct GaussianCorrelated {
  Eigen::MatrixXd mixing;
};

/// Rows a = M z, z iid centered Bernoulli(p) scaled to unit variance.
struct CenteredBernoulliMixed {
  double p = 0.8;
  Eigen::MatrixXd mixing;
};

/// Rows a = M z, z iid centered chi-square(dof) scaled to unit variance.
struct CenteredChiSquareMixed {
  int dof = 1;
  Eigen::MatrixXd mixing;
};

/// Rows vec(a a^T), a standard normal in R^n.
struct QuadraticGaussian {
  int n = 0;
};

/// Rows vec(H + I), H Gaussian Wigner: N(0,1) off-diagonal, N(0,2) diagonal.
struct WignerSurrogate {
  int n = 0;
};

using EnsembleSpec = std::variant<GaussianIid, GaussianCorrelated, CenteredBernoulliMixed,
                                  CenteredChiSquareMixed, QuadraticGaussian, WignerSurrogate>;

/// Side length n of the ensemble (signal dimension or matrix side).
int ensemble_side(const EnsembleSpec &spec);
/// Row length N: n for vector ensembles, n^2 for matrix ensembles.
int ensemble_row_length(const EnsembleSpec &spec);
bool is_matrix_ensemble(const EnsembleSpec &spec);
std::string ensemble_name(const EnsembleSpec &spec);
/// Throws ParameterError when the spec violates its invariants.
void validate(const EnsembleSpec &spec);

struct MeasurementOperator {
  Eigen::MatrixXd rows; // m x N
  EnsembleSpec spec;
  std::uint64_t seed = 0;

  int m() const { return static_cast<int>(rows.rows()); }
  int N() const { return static_cast<int>(rows.cols()); }
};

/// Draws m iid rows from spec. Pure function of (spec, m, seed).
MeasurementOperator sample_operator(const EnsembleSpec &spec, int m, std::uint64_t seed);

/// Standard-normal n x n matrix, the per-trial mixing matrix of the mixed ensembles.
Eigen::MatrixXd sample_mixing(int n, std::uint64_t seed);

struct MomentDeviation {
  double mean = 0.0;       // max_i |mu_A,i - mu_B,i|
  double covariance = 0.0; // max_ij |Sigma_A,ij - Sigma_B,ij|
};

Eigen::VectorXd empirical_mean(const Eigen::MatrixXd &rows);
Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd &rows);

/// Compares empirical first and second moments of two ensembles from
/// `samples` rows each. Throws ParameterError on row-length mismatch.
MomentDeviation second_moment_match(const EnsembleSpec &a, const EnsembleSpec &b, int samples,
                                    std::uint64_t seed);

/// Empirical statistics for the bounded-mean and bounded-power conditions.
struct AssumptionDiagnostics {
  double mean_ratio = 0.0;  // ||mu||^2 / avg ||a_i - mu||^2
  double power_ratio = 0.0; // Var(||a_i||^2) / (avg ||a_i - mu||^2)^2
  /// Root-mean-square size of mean_ratio for a zero-mean ensemble with the
  /// same covariance: sqrt(tr(S)^2 + 2 tr(S^2)) / (m tr(S)).
  double mean_ratio_se = 0.0;
  int n = 0;
  int m = 0;
};

/// Requires m >= 30.
AssumptionDiagnostics diagnose(const EnsembleSpec &spec, int m, std::uint64_t seed);
AssumptionDiagnostics diagnose_rows(const Eigen::MatrixXd &rows, int n);

} // namespace unirec
