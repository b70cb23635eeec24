#include "unirec/model.hpp"

#include "unirec/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace unirec {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};

double nonzero_normal(Rng &rng) {
  std::normal_distribution<double> normal;
  double v = 0.0;
  while (v == 0.0) v = normal(rng);
  return v;
}

/// First `count` entries of a uniformly shuffled 0..total-1.
std::vector<int> sample_without_replacement(int total, int count, Rng &rng) {
  std::vector<int> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

int numerical_rank(const Eigen::MatrixXd &sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd abs_vals = es.eigenvalues().cwiseAbs();
  const double top = abs_vals.maxCoeff();
  if (top == 0.0) return 0;
  return static_cast<int>((abs_vals.array() > 1e-8 * top).count());
}

GroundTruth sparse_symmetric(const SparseSymmetric &kind, Rng &rng) {
  const int n = kind.n;
  // Upper-triangle positions, diagonal included. An off-diagonal pick costs two
  // nonzeros; with the psd flag a pick also forces the touched diagonals.
  std::vector<std::pair<int, int>> positions;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) positions.emplace_back(i, j);

  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<int> order = sample_without_replacement(static_cast<int>(positions.size()),
                                                        static_cast<int>(positions.size()), rng);
    std::vector<char> diag(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<int, int>> chosen;
    int remaining = kind.k;
    for (int o : order) {
      if (remaining == 0) break;
      const auto [i, j] = positions[static_cast<std::size_t>(o)];
      int cost = 0;
      if (i == j) {
        cost = diag[static_cast<std::size_t>(i)] ? 0 : 1;
        if (cost == 0) continue; // already forced by the psd rule
      } else {
        cost = 2;
        if (kind.psd) cost += (diag[static_cast<std::size_t>(i)] ? 0 : 1) + (diag[static_cast<std::size_t>(j)] ? 0 : 1);
      }
      if (cost > remaining) continue;
      remaining -= cost;
      if (i == j || kind.psd) {
        diag[static_cast<std::size_t>(i)] = 1;
        diag[static_cast<std::size_t>(j)] = 1;
      }
      if (i != j) chosen.emplace_back(i, j);
    }
    if (remaining != 0) continue;

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);
    for (const auto &[i, j] : chosen) {
      const double v = nonzero_normal(rng);
      X(i, j) = v;
      X(j, i) = v;
    }
    for (int i = 0; i < n; ++i) {
      if (!diag[static_cast<std::size_t>(i)]) continue;
      const double g = nonzero_normal(rng);
      // Strict diagonal dominance keeps the psd variant PSD.
      X(i, i) = kind.psd ? X.row(i).cwiseAbs().sum() + std::abs(g) : g;
    }
    return GroundTruth{kind, vectorize(X)};
  }
  throw ParameterError("sparse-symmetric: could not place exactly k nonzeros");
}

} // namespace

int truth_side(const TruthKind &kind) {
  return std::visit([](const auto &k) { return k.n; }, kind);
}

bool is_matrix_kind(const TruthKind &kind) { return !std::holds_alternative<SparseVector>(kind); }

int truth_dim(const TruthKind &kind) {
  const int n = truth_side(kind);
  return is_matrix_kind(kind) ? n * n : n;
}

std::string truth_name(const TruthKind &kind) {
  return std::visit(overloaded{
                        [](const SparseVector &) { return std::string("sparse-vector"); },
                        [](const LowRankPsd &) { return std::string("lowrank-psd"); },
                        [](const SparseSymmetric &) { return std::string("sparse-symmetric"); },
                        [](const SparseLowRankPsd &) { return std::string("sparse-lowrank-psd"); },
                    },
                    kind);
}

void validate(const TruthKind &kind) {
  std::visit(overloaded{
                 [](const SparseVector &k) {
                   if (k.n < 1 || k.k < 1 || k.k > k.n)
                     throw ParameterError("sparse-vector: need 1 <= k <= n");
                 },
                 [](const LowRankPsd &k) {
                   if (k.n < 1 || k.r < 1 || k.r > k.n) throw ParameterError("lowrank-psd: need 1 <= r <= n");
                 },
                 [](const SparseSymmetric &k) {
                   if (k.n < 1 || k.k < 1 || k.k > k.n * k.n)
                     throw ParameterError("sparse-symmetric: need 1 <= k <= n^2");
                 },
                 [](const SparseLowRankPsd &k) {
                   if (k.n < 1 || k.k < 1 || k.k > k.n || k.r < 1 || k.r > k.k)
                     throw ParameterError("sparse-lowrank-psd: need 1 <= r <= k <= n");
                 },
             },
             kind);
}

GroundTruth generate_truth(const TruthKind &kind, Rng &rng) {
  validate(kind);
  return std::visit(
      overloaded{
          [&](const SparseVector &k) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(k.n);
            for (int i : sample_without_replacement(k.n, k.k, rng)) x(i) = nonzero_normal(rng);
            return GroundTruth{kind, x};
          },
          [&](const LowRankPsd &k) {
            std::normal_distribution<double> normal;
            Eigen::MatrixXd G(k.n, k.r);
            for (int i = 0; i < k.n; ++i)
              for (int j = 0; j < k.r; ++j) G(i, j) = normal(rng);
            const Eigen::MatrixXd X = G * G.transpose();
            return GroundTruth{kind, vectorize(X)};
          },
          [&](const SparseSymmetric &k) { return sparse_symmetric(k, rng); },
          [&](const SparseLowRankPsd &k) {
            std::normal_distribution<double> normal;
            std::vector<int> support = sample_without_replacement(k.n, k.k, rng);
            std::sort(support.begin(), support.end());
            Eigen::MatrixXd G(k.k, k.r);
            for (int i = 0; i < k.k; ++i)
              for (int j = 0; j < k.r; ++j) G(i, j) = normal(rng);
            const Eigen::MatrixXd block = G * G.transpose();
            Eigen::MatrixXd X = Eigen::MatrixXd::Zero(k.n, k.n);
            for (int a = 0; a < k.k; ++a)
              for (int b = 0; b < k.k; ++b)
                X(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]) = block(a, b);
            return GroundTruth{kind, vectorize(X)};
          },
      },
      kind);
}

std::optional<std::string> invariant_violation(const GroundTruth &truth) {
  const int N = truth_dim(truth.kind);
  if (truth.values.size() != N) return "values length does not match the kind";
  if (!truth.values.allFinite()) return "non-finite values";

  const auto nonzeros = static_cast<int>((truth.values.array() != 0.0).count());
  if (const auto *k = std::get_if<SparseVector>(&truth.kind)) {
    if (nonzeros != k->k) return "sparse-vector: nonzero count differs from k";
    return std::nullopt;
  }

  const int n = truth.side();
  const Eigen::MatrixXd X = devectorize(truth.values, n);
  if ((X - X.transpose()).cwiseAbs().maxCoeff() != 0.0)
    return "matrix is not symmetric";

  auto min_eig = [&] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };

  return std::visit(
      overloaded{
          [&](const SparseVector &) -> std::optional<std::string> { return std::nullopt; },
          [&](const LowRankPsd &k) -> std::optional<std::string> {
            if (min_eig() < -1e-10) return "lowrank-psd: not PSD";
            if (numerical_rank(X) != k.r) return "lowrank-psd: rank differs from r";
            return std::nullopt;
          },
          [&](const SparseSymmetric &k) -> std::optional<std::string> {
            if (nonzeros != k.k) return "sparse-symmetric: nonzero count differs from k";
            if (k.psd && min_eig() < -1e-10) return "sparse-symmetric: psd flag set but not PSD";
            return std::nullopt;
          },
          [&](const SparseLowRankPsd &k) -> std::optional<std::string> {
            int touched = 0;
            for (int i = 0; i < n; ++i)
              if ((X.row(i).array() != 0.0).any()) ++touched;
            if (touched > k.k) return "sparse-lowrank-psd: support exceeds k x k block";
            if (min_eig() < -1e-10) return "sparse-lowrank-psd: not PSD";
            if (numerical_rank(X) != k.r) return "sparse-lowrank-psd: rank differs from r";
            return std::nullopt;
          },
      },
      truth.kind);
}

Eigen::VectorXd vectorize(const Eigen::MatrixXd &matrix) {
  Eigen::VectorXd out(matrix.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out.data(), matrix.rows(), matrix.cols()) = matrix;
  return out;
}

Eigen::MatrixXd devectorize(const Eigen::VectorXd &values, int n) {
  if (values.size() != static_cast<Eigen::Index>(n) * n)
    throw ParameterError("devectorize: length is not n^2");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, n);
}

bool penalty_is_matrix(const PenaltySpec &penalty) { return !std::holds_alternative<L1>(penalty); }

bool penalty_requires_psd(const PenaltySpec &penalty) {
  return std::visit(overloaded{
                        [](const L1 &) { return false; },
                        [](const TracePsd &) { return true; },
                        [](const L1Matrix &p) { return p.psd; },
                        [](const L1PlusTracePsd &) { return true; },
                    },
                    penalty);
}

std::string penalty_name(const PenaltySpec &penalty) {
  return std::visit(overloaded{
                        [](const L1 &) { return std::string("l1"); },
                        [](const TracePsd &) { return std::string("trace-psd"); },
                        [](const L1Matrix &p) { return std::string(p.psd ? "l1-matrix-psd" : "l1-matrix"); },
                        [](const L1PlusTracePsd &) { return std::string("l1-plus-trace-psd"); },
                    },
                    penalty);
}

PenaltySpec penalty_from_name(const std::string &name, double lambda) {
  if (name == "l1") return L1{};
  if (name == "trace-psd") return TracePsd{};
  if (name == "l1-matrix") return L1Matrix{false};
  if (name == "l1-matrix-psd") return L1Matrix{true};
  if (name == "l1-plus-trace-psd") return L1PlusTracePsd{lambda};
  throw ParameterError("unknown penalty: " + name);
}

void validate(const PenaltySpec &penalty) {
  if (const auto *p = std::get_if<L1PlusTracePsd>(&penalty))
    if (!(p->lambda >= 0.0) || !std::isfinite(p->lambda))
      throw ParameterError("l1-plus-trace-psd: lambda must be finite and >= 0");
}

double penalty_value(const PenaltySpec &penalty, const Eigen::VectorXd &x, int side) {
  auto trace = [&] {
    double t = 0.0;
    for (int i = 0; i < side; ++i) t += x(static_cast<Eigen::Index>(i) * side + i);
    return t;
  };
  return std::visit(overloaded{
                        [&](const L1 &) { return x.lpNorm<1>(); },
                        [&](const TracePsd &) { return trace(); },
                        [&](const L1Matrix &) { return x.lpNorm<1>(); },
                        [&](const L1PlusTracePsd &p) { return x.lpNorm<1>() + p.lambda * trace(); },
                    },
                    penalty);
}

void SolverConfig::validate() const {
  if (!(rho > 0.0) || max_iter < 1 || !(eps_abs > 0.0) || !(eps_rel > 0.0) || !(success_threshold > 0.0))
    throw ParameterError("solver config: all parameters must be positive");
  if (!(success_threshold > 10.0 * eps_abs))
    throw ParameterError("solver config: success_threshold must exceed 10 eps_abs");
}

RecoveryProblem make_problem(MeasurementOperator op, GroundTruth truth, PenaltySpec penalty) {
  validate(penalty);
  if (op.N() != truth.dim()) throw ParameterError("make_problem: operator width differs from signal length");
  if (penalty_is_matrix(penalty) != is_matrix_kind(truth.kind))
    throw ParameterError("make_problem: penalty " + penalty_name(penalty) + " does not fit " + truth_name(truth.kind));
  RecoveryProblem problem{std::move(op), Eigen::VectorXd(), std::move(truth), penalty};
  problem.y = problem.op.rows * problem.truth.values;
  return problem;
}

std::string to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::Converged: return "converged";
  case SolveStatus::MaxIters: return "max-iters";
  case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

double relative_error(const Eigen::VectorXd &estimate, const Eigen::VectorXd &truth) {
  const double denom = truth.norm();
  const double diff = (estimate - truth).norm();
  return denom > 0.0 ? diff / denom : diff;
}

} // namespace unirec
