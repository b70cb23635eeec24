#pragma once

#include "unirec/ensembles.hpp"
#include "unirec/rng.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>

namespace unirec {

// ---------------------------------------------------------------------------
// Ground truth signals
// ---------------------------------------------------------------------------

struct SparseVector {
  int n = 0;
  int k = 0;
};

/// X0 = G G^T with G an n x r standard-normal matrix.
struct LowRankPsd {
  int n = 0;
  int r = 0;
};

/// Symmetric n x n matrix with exactly k nonzero entries counted over all n^2
/// positions, so an off-diagonal pair counts twice.
struct SparseSymmetric {
  int n = 0;
  int k = 0;
  bool psd = false;
};

/// PSD rank-r matrix supported on a k x k principal submatrix.
struct SparseLowRankPsd {
  int n = 0;
  int k = 0;
  int r = 0;
};

using TruthKind = std::variant<SparseVector, LowRankPsd, SparseSymmetric, SparseLowRankPsd>;

int truth_side(const TruthKind &kind);
/// Length of the vectorized unknown: n for vectors, n^2 for matrices.
int truth_dim(const TruthKind &kind);
bool is_matrix_kind(const TruthKind &kind);
std::string truth_name(const TruthKind &kind);
void validate(const TruthKind &kind);

struct GroundTruth {
  TruthKind kind;
  Eigen::VectorXd values; // row-major vec for matrices

  int side() const { return truth_side(kind); }
  int dim() const { return static_cast<int>(values.size()); }
};

/// Nonzero entries standard normal, supports uniform without replacement.
/// Throws ParameterError for k > N, r > n or non-positive sizes.
GroundTruth generate_truth(const TruthKind &kind, Rng &rng);

/// Returns a description of the first violated invariant, if any.
std::optional<std::string> invariant_violation(const GroundTruth &truth);

/// Row-major flattening.
Eigen::VectorXd vectorize(const Eigen::MatrixXd &matrix);
inline const Eigen::VectorXd &vectorize(const GroundTruth &truth) { return truth.values; }
/// Inverse of vectorize for a square n x n matrix.
Eigen::MatrixXd devectorize(const Eigen::VectorXd &values, int n);

// ---------------------------------------------------------------------------
// Penalties
// ---------------------------------------------------------------------------

struct L1 {};
/// tr(X) over the PSD cone.
struct TracePsd {};
/// ||vec X||_1, optionally restricted to the PSD cone.
struct L1Matrix {
  bool psd = false;
};
/// ||vec X||_1 + lambda tr(X) over the PSD cone.
struct L1PlusTracePsd {
  double lambda = 0.0;
};

using PenaltySpec = std::variant<L1, TracePsd, L1Matrix, L1PlusTracePsd>;

bool penalty_is_matrix(const PenaltySpec &penalty);
bool penalty_requires_psd(const PenaltySpec &penalty);
std::string penalty_name(const PenaltySpec &penalty);
void validate(const PenaltySpec &penalty);

/// Inverse of penalty_name; `lambda` only applies to l1-plus-trace-psd.
PenaltySpec penalty_from_name(const std::string &name, double lambda = 0.0);

/// f(x) for the penalty; `side` is the matrix side for matrix penalties.
double penalty_value(const PenaltySpec &penalty, const Eigen::VectorXd &x, int side);

// ---------------------------------------------------------------------------
// Problems and solutions
// ---------------------------------------------------------------------------

struct SolverConfig {
  double rho = 1.0;
  int max_iter = 50000;
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  /// Relative error at or below which a solve counts as perfect recovery.
  double success_threshold = 1e-3;

  void validate() const;
};

/// Noiseless instance y = A vec(x0).
struct RecoveryProblem {
  MeasurementOperator op;
  Eigen::VectorXd y;
  GroundTruth truth;
  PenaltySpec penalty;

  int m() const { return op.m(); }
};

/// Builds y exactly from the operator and truth. Throws ParameterError on
/// dimension or penalty/kind mismatch.
RecoveryProblem make_problem(MeasurementOperator op, GroundTruth truth, PenaltySpec penalty);

enum class SolveStatus { Converged, MaxIters, NumericalFailure };

std::string to_string(SolveStatus status);

struct Solution {
  Eigen::VectorXd estimate;
  double objective = 0.0;
  double rel_error = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  /// Constraint residual ||A x - y|| / max(1, ||y||) of the estimate.
  double constraint_residual = 0.0;
  /// The Gram factorization needed the ridge guardrail.
  bool ridge_used = false;
};

double relative_error(const Eigen::VectorXd &estimate, const Eigen::VectorXd &truth);

} // namespace unirec
