#include "unirec/solvers.hpp"

#include "unirec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace unirec {

// ---------------------------------------------------------------------------
// Prox operators
// ---------------------------------------------------------------------------

Eigen::VectorXd soft_threshold(const Eigen::VectorXd &v, double t) {
  if (!(t >= 0.0)) throw ParameterError("soft_threshold: t must be >= 0");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i)) - t;
    out(i) = a > 0.0 ? std::copysign(a, v(i)) : 0.0;
  }
  return out;
}

EigenDecomposition eigh(const Eigen::MatrixXd &S) {
  if (S.rows() != S.cols()) throw ParameterError("eigh: matrix is not square");
  const double tol = 1e-10 * std::max(1.0, S.norm());
  if (S.size() > 0 && (S - S.transpose()).cwiseAbs().maxCoeff() > tol)
    throw ParameterError("eigh: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("eigh: eigensolver did not converge");
  // Eigen sorts ascending.
  EigenDecomposition out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

namespace {

/// V diag(max(lambda - t, 0)) V^T without the symmetry check.
Eigen::MatrixXd shrink_spectrum(const Eigen::MatrixXd &X, double t,
                                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> &es) {
  es.compute(X);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const Eigen::VectorXd &lambda = es.eigenvalues();
  const Eigen::Index n = X.rows();
  Eigen::Index first = n; // eigenvalues ascending; keep those above t
  while (first > 0 && lambda(first - 1) > t) --first;
  const Eigen::Index keep = n - first;
  if (keep == 0) return Eigen::MatrixXd::Zero(n, n);
  const auto V = es.eigenvectors().rightCols(keep);
  const Eigen::VectorXd shrunk = (lambda.tail(keep).array() - t).matrix();
  Eigen::MatrixXd out = V * shrunk.asDiagonal() * V.transpose();
  return 0.5 * (out + out.transpose());
}

} // namespace

Eigen::MatrixXd project_psd(const Eigen::MatrixXd &X) { return prox_trace_psd(X, 0.0); }

Eigen::MatrixXd prox_trace_psd(const Eigen::MatrixXd &X, double t) {
  if (!(t >= 0.0)) throw ParameterError("prox_trace_psd: t must be >= 0");
  const EigenDecomposition ed = eigh(X);
  const Eigen::VectorXd shrunk = (ed.values.array() - t).max(0.0).matrix();
  Eigen::MatrixXd out = ed.vectors * shrunk.asDiagonal() * ed.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

// ---------------------------------------------------------------------------
// Affine projection
// ---------------------------------------------------------------------------

namespace {

bool well_conditioned(const Eigen::LLT<Eigen::MatrixXd> &llt) {
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  if (!d.allFinite() || d.minCoeff() <= 0.0) return false;
  return d.minCoeff() >= 1e-7 * d.maxCoeff();
}

} // namespace

AffineProjector::AffineProjector(const Eigen::MatrixXd &A, const Eigen::VectorXd &y) : A_(A), y_(y) {
  if (A.rows() != y.size()) throw ParameterError("AffineProjector: A and y disagree on m");
  if (A.rows() == 0) throw ParameterError("AffineProjector: need at least one constraint");
  if (!A.allFinite() || !y.allFinite()) throw NumericalError("AffineProjector: non-finite input");

  Eigen::MatrixXd gram = A * A.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (!well_conditioned(llt)) {
    const double ridge = 1e-10 * gram.trace() / static_cast<double>(gram.rows());
    gram.diagonal().array() += ridge;
    llt.compute(gram);
    ridge_used_ = true;
    if (llt.info() != Eigen::Success || !(ridge > 0.0))
      throw NumericalError("AffineProjector: Cholesky of A A^T failed after ridge retry");
  }
  whitened_ = llt.matrixL().solve(A);
  particular_ = whitened_.transpose() * llt.matrixL().solve(y);
  y_scale_ = std::max(1.0, y.norm());
  if (!whitened_.allFinite() || !particular_.allFinite())
    throw NumericalError("AffineProjector: non-finite factorization");
}

void AffineProjector::project_into(const Eigen::VectorXd &v, Eigen::VectorXd &out,
                                   Eigen::VectorXd &scratch) const {
  scratch.noalias() = whitened_ * v;
  out = v + particular_;
  out.noalias() -= whitened_.transpose() * scratch;
}

Eigen::VectorXd AffineProjector::project(const Eigen::VectorXd &v) const {
  if (v.size() != A_.cols()) throw ParameterError("project_affine: vector length differs from A");
  Eigen::VectorXd out, scratch;
  project_into(v, out, scratch);
  return out;
}

double AffineProjector::relative_residual(const Eigen::VectorXd &x) const {
  return (A_ * x - y_).norm() / y_scale_;
}

Eigen::VectorXd project_affine(const Eigen::VectorXd &v, const AffineProjector &proj) {
  return proj.project(v);
}

// ---------------------------------------------------------------------------
// ADMM
// ---------------------------------------------------------------------------

namespace {

void symmetrize(Eigen::VectorXd &x, int n) {
  Eigen::Map<Eigen::MatrixXd> X(x.data(), n, n);
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) {
      const double avg = 0.5 * (X(i, j) + X(j, i));
      X(i, j) = avg;
      X(j, i) = avg;
    }
}

void soft_threshold_into(const Eigen::VectorXd &v, double t, Eigen::VectorXd &out) {
  out.resize(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i)) - t;
    out(i) = a > 0.0 ? std::copysign(a, v(i)) : 0.0;
  }
}

class PsdProx {
public:
  explicit PsdProx(int n) : n_(n), es_(n) {}

  void apply(const Eigen::VectorXd &v, double t, Eigen::VectorXd &out) {
    Eigen::Map<const Eigen::MatrixXd> V(v.data(), n_, n_);
    Eigen::MatrixXd sym = 0.5 * (V + V.transpose());
    const Eigen::MatrixXd Z = shrink_spectrum(sym, t, es_);
    out = Eigen::Map<const Eigen::VectorXd>(Z.data(), Z.size());
  }

private:
  int n_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_;
};

enum class Scheme { TwoBlockL1, TwoBlockTrace, ThreeBlock };

struct Plan {
  Scheme scheme = Scheme::TwoBlockL1;
  bool matrix = false;
  double trace_weight = 0.0; // lambda in the PSD block of the three-block scheme
};

Plan make_plan(const PenaltySpec &penalty) {
  Plan plan;
  plan.matrix = penalty_is_matrix(penalty);
  if (std::holds_alternative<TracePsd>(penalty)) {
    plan.scheme = Scheme::TwoBlockTrace;
  } else if (const auto *p = std::get_if<L1Matrix>(&penalty)) {
    plan.scheme = p->psd ? Scheme::ThreeBlock : Scheme::TwoBlockL1;
  } else if (const auto *p = std::get_if<L1PlusTracePsd>(&penalty)) {
    plan.scheme = Scheme::ThreeBlock;
    plan.trace_weight = p->lambda;
  }
  return plan;
}

struct Progress {
  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;

  void offer(double score, const Eigen::VectorXd &candidate) {
    if (score < best_score) {
      best_score = score;
      best = candidate;
    }
  }
};

} // namespace

Solution solve(const Eigen::MatrixXd &A, const Eigen::VectorXd &y, const PenaltySpec &penalty, int side,
               const SolverConfig &cfg, const Eigen::VectorXd *truth) {
  cfg.validate();
  validate(penalty);
  const Plan plan = make_plan(penalty);
  const Eigen::Index N = A.cols();
  if (plan.matrix && static_cast<Eigen::Index>(side) * side != N)
    throw ParameterError("solve: matrix penalty needs N = side^2");
  if (!plan.matrix && side != N) throw ParameterError("solve: vector penalty needs N = side");
  if (truth && truth->size() != N) throw ParameterError("solve: truth length differs from N");

  Solution sol;
  auto finish = [&](Eigen::VectorXd estimate, SolveStatus status, int iters, double residual) {
    sol.estimate = std::move(estimate);
    if (!sol.estimate.allFinite()) {
      sol.estimate.setZero();
      status = SolveStatus::NumericalFailure;
      residual = std::numeric_limits<double>::infinity();
    }
    sol.status = status;
    sol.iterations = iters;
    sol.constraint_residual = residual;
    sol.objective = penalty_value(penalty, sol.estimate, side);
    sol.rel_error = truth ? relative_error(sol.estimate, *truth) : std::numeric_limits<double>::quiet_NaN();
    return sol;
  };

  std::optional<AffineProjector> proj;
  try {
    proj.emplace(A, y);
  } catch (const NumericalError &) {
    return finish(Eigen::VectorXd::Zero(N), SolveStatus::NumericalFailure, 0,
                  std::numeric_limits<double>::infinity());
  }
  sol.ridge_used = proj->ridge_used();

  const double rho = cfg.rho;
  const double sqrtN = std::sqrt(static_cast<double>(N));
  Eigen::VectorXd scratch, work;
  Progress progress;
  PsdProx psd(plan.matrix ? side : 1);

  if (plan.scheme != Scheme::ThreeBlock) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(N), z = Eigen::VectorXd::Zero(N), u = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd z_prev(N);
    for (int it = 1; it <= cfg.max_iter; ++it) {
      work = z - u;
      proj->project_into(work, x, scratch);
      if (plan.matrix) symmetrize(x, side);
      work = x + u;
      z_prev.swap(z);
      if (plan.scheme == Scheme::TwoBlockL1)
        soft_threshold_into(work, 1.0 / rho, z);
      else
        psd.apply(work, 1.0 / rho, z);
      u += x - z;

      const double r_pri = (x - z).norm();
      const double r_dual = rho * (z - z_prev).norm();
      if (!std::isfinite(r_pri) || !std::isfinite(r_dual))
        return finish(progress.best.size() ? progress.best : Eigen::VectorXd::Zero(N),
                      SolveStatus::NumericalFailure, it, std::numeric_limits<double>::infinity());
      const double eps_pri = sqrtN * cfg.eps_abs + cfg.eps_rel * std::max(x.norm(), z.norm());
      const double eps_dual = sqrtN * cfg.eps_abs + cfg.eps_rel * rho * u.norm();
      progress.offer(std::max(r_pri / eps_pri, r_dual / eps_dual), z);
      if (r_pri <= eps_pri && r_dual <= eps_dual) {
        const double res = proj->relative_residual(z);
        if (res <= cfg.eps_abs) return finish(z, SolveStatus::Converged, it, res);
      }
    }
  } else {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(N), z_prev(N);
    Eigen::VectorXd x1(N), x2(N), x3(N);
    Eigen::VectorXd u1 = Eigen::VectorXd::Zero(N), u2 = Eigen::VectorXd::Zero(N), u3 = Eigen::VectorXd::Zero(N);
    const double sqrt3 = std::sqrt(3.0);
    for (int it = 1; it <= cfg.max_iter; ++it) {
      work = z - u1;
      proj->project_into(work, x1, scratch);
      symmetrize(x1, side);
      work = z - u2;
      soft_threshold_into(work, 1.0 / rho, x2);
      work = z - u3;
      psd.apply(work, plan.trace_weight / rho, x3);

      z_prev.swap(z);
      z = (x1 + u1 + x2 + u2 + x3 + u3) / 3.0;
      u1 += x1 - z;
      u2 += x2 - z;
      u3 += x3 - z;

      const double r_pri =
          std::sqrt((x1 - z).squaredNorm() + (x2 - z).squaredNorm() + (x3 - z).squaredNorm());
      const double r_dual = rho * sqrt3 * (z - z_prev).norm();
      if (!std::isfinite(r_pri) || !std::isfinite(r_dual))
        return finish(progress.best.size() ? progress.best : Eigen::VectorXd::Zero(N),
                      SolveStatus::NumericalFailure, it, std::numeric_limits<double>::infinity());
      const double x_norm = std::sqrt(x1.squaredNorm() + x2.squaredNorm() + x3.squaredNorm());
      const double u_norm = std::sqrt(u1.squaredNorm() + u2.squaredNorm() + u3.squaredNorm());
      const double eps_pri = sqrt3 * sqrtN * cfg.eps_abs + cfg.eps_rel * std::max(x_norm, sqrt3 * z.norm());
      const double eps_dual = sqrt3 * sqrtN * cfg.eps_abs + cfg.eps_rel * rho * u_norm;
      progress.offer(std::max(r_pri / eps_pri, r_dual / eps_dual), x3);
      if (r_pri <= eps_pri && r_dual <= eps_dual) {
        const double res = proj->relative_residual(x3);
        if (res <= cfg.eps_abs) return finish(x3, SolveStatus::Converged, it, res);
      }
    }
  }

  Eigen::VectorXd best = std::move(progress.best);
  const double res = proj->relative_residual(best);
  return finish(std::move(best), SolveStatus::MaxIters, cfg.max_iter, res);
}

Solution solve(const RecoveryProblem &problem, const SolverConfig &cfg) {
  const int side = problem.truth.side();
  return solve(problem.op.rows, problem.y, problem.penalty, side, cfg, &problem.truth.values);
}

// ---------------------------------------------------------------------------
// Enumeration oracle
// ---------------------------------------------------------------------------

OracleResult solve_oracle_l1(const Eigen::MatrixXd &A, const Eigen::VectorXd &y) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (n > 10 || m < 1 || m >= n) throw ParameterError("solve_oracle_l1: need 1 <= m < n <= 10");
  if (y.size() != m) throw ParameterError("solve_oracle_l1: y length differs from m");

  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, y.norm());

  std::vector<int> subset(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) subset[static_cast<std::size_t>(i)] = i;
  Eigen::MatrixXd As(m, m);
  while (true) {
    for (int j = 0; j < m; ++j) As.col(j) = A.col(subset[static_cast<std::size_t>(j)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(As);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) {
      const Eigen::VectorXd xs = lu.solve(y);
      if ((As * xs - y).norm() <= 1e-9 * scale) {
        const double obj = xs.lpNorm<1>();
        if (obj < best.objective) {
          best.objective = obj;
          best.minimizer = Eigen::VectorXd::Zero(n);
          for (int j = 0; j < m; ++j) best.minimizer(subset[static_cast<std::size_t>(j)]) = xs(j);
        }
      }
    }
    // Next m-combination of {0..n-1} in lexicographic order.
    int i = m - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j)
      subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
  }
  if (!std::isfinite(best.objective)) throw DomainError("solve_oracle_l1: no nonsingular m-column subset");
  return best;
}

} // namespace unirec
