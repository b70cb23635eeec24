#pragma once

#include "unirec/model.hpp"

#include <Eigen/Dense>

namespace unirec {

// ---------------------------------------------------------------------------
// Proximal building blocks
// ---------------------------------------------------------------------------

/// sign(v_i) max(|v_i| - t, 0). Requires t >= 0.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd &v, double t);

struct EigenDecomposition {
  Eigen::VectorXd values;  // descending
  Eigen::MatrixXd vectors; // columns orthonormal, matching `values`
};

/// Symmetric eigendecomposition. Throws ParameterError if S is not symmetric
/// to 1e-10 max(1, ||S||_F).
EigenDecomposition eigh(const Eigen::MatrixXd &S);

/// Frobenius-nearest PSD matrix (negative eigenvalues clamped to zero).
Eigen::MatrixXd project_psd(const Eigen::MatrixXd &X);

/// argmin_Z t tr(Z) + 1/2 ||Z - X||_F^2 over PSD Z: eigenvalues shrink by t.
Eigen::MatrixXd prox_trace_psd(const Eigen::MatrixXd &X, double t);

/// Orthogonal projection onto {x : A x = y} from a cached factorization of
/// A A^T. If the Cholesky factor is missing or has a pivot below 1e-7 of
/// the largest, a ridge of 1e-10 tr(A A^T)/m is added and flagged.
class AffineProjector {
public:
  AffineProjector(const Eigen::MatrixXd &A, const Eigen::VectorXd &y);

  Eigen::VectorXd project(const Eigen::VectorXd &v) const;
  /// In-place variant for solver loops; `scratch` is resized as needed.
  void project_into(const Eigen::VectorXd &v, Eigen::VectorXd &out, Eigen::VectorXd &scratch) const;

  /// ||A x - y|| / max(1, ||y||).
  double relative_residual(const Eigen::VectorXd &x) const;

  bool ridge_used() const { return ridge_used_; }
  int rows() const { return static_cast<int>(A_.rows()); }
  int cols() const { return static_cast<int>(A_.cols()); }
  const Eigen::MatrixXd &matrix() const { return A_; }
  const Eigen::VectorXd &rhs() const { return y_; }

private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd whitened_;   // L^{-1} A
  Eigen::VectorXd particular_; // A^T (A A^T)^{-1} y
  double y_scale_ = 1.0;
  bool ridge_used_ = false;
};

Eigen::VectorXd project_affine(const Eigen::VectorXd &v, const AffineProjector &proj);

// ---------------------------------------------------------------------------
// Estimator
// ---------------------------------------------------------------------------

/// argmin f(x) subject to A x = y, x in S, by ADMM. L1, L1Matrix{psd=false}
/// and TracePsd use two blocks (affine projection, penalty prox);
/// L1Matrix{psd=true} and L1PlusTracePsd use three-block consensus (affine,
/// l1 prox, PSD/trace prox). The returned estimate is the penalty-block
/// iterate, so it carries the exact sparsity/PSD structure of the prox.
Solution solve(const RecoveryProblem &problem, const SolverConfig &cfg);

/// Solves an arbitrary instance without a known truth; rel_error is NaN.
Solution solve(const Eigen::MatrixXd &A, const Eigen::VectorXd &y, const PenaltySpec &penalty,
               int side, const SolverConfig &cfg, const Eigen::VectorXd *truth = nullptr);

struct OracleResult {
  double objective = 0.0;
  Eigen::VectorXd minimizer;
};

/// Exact basis pursuit min ||x||_1 s.t. A x = y by enumerating the basic
/// feasible points of the split LP (all nonsingular m-column subsets).
/// Requires n <= 10 and m < n; throws DomainError when no m-subset is
/// nonsingular.
OracleResult solve_oracle_l1(const Eigen::MatrixXd &A, const Eigen::VectorXd &y);

} // namespace unirec
