#include "unirec/ensembles.hpp"

#include "unirec/error.hpp"
#include "unirec/rng.hpp"

#include <cmath>
#include <random>
#include <type_traits>

namespace unirec {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};

Eigen::MatrixXd standard_normal(int rows, int cols, Rng &rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(rows, cols);
  // Fill row by row so the stream order matches "row i drawn before row i+1".
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out(i, j) = normal(rng);
  return out;
}

void check_mixing(const Eigen::MatrixXd &mixing, const char *name) {
  if (mixing.rows() == 0 || mixing.rows() != mixing.cols())
    throw ParameterError(std::string(name) + ": mixing matrix must be square and non-empty");
  if (!mixing.allFinite())
    throw ParameterError(std::string(name) + ": mixing matrix has non-finite entries");
}

} // namespace

int ensemble_side(const EnsembleSpec &spec) {
  return std::visit(overloaded{
                        [](const GaussianIid &e) { return e.n; },
                        [](const GaussianCorrelated &e) { return static_cast<int>(e.mixing.rows()); },
                        [](const CenteredBernoulliMixed &e) { return static_cast<int>(e.mixing.rows()); },
                        [](const CenteredChiSquareMixed &e) { return static_cast<int>(e.mixing.rows()); },
                        [](const QuadraticGaussian &e) { return e.n; },
                        [](const WignerSurrogate &e) { return e.n; },
                    },
                    spec);
}

bool is_matrix_ensemble(const EnsembleSpec &spec) {
  return std::holds_alternative<QuadraticGaussian>(spec) || std::holds_alternative<WignerSurrogate>(spec);
}

int ensemble_row_length(const EnsembleSpec &spec) {
  const int n = ensemble_side(spec);
  return is_matrix_ensemble(spec) ? n * n : n;
}

std::string ensemble_name(const EnsembleSpec &spec) {
  return std::visit(overloaded{
                        [](const GaussianIid &) { return std::string("gaussian"); },
                        [](const GaussianCorrelated &) { return std::string("gaussian-correlated"); },
                        [](const CenteredBernoulliMixed &) { return std::string("bernoulli"); },
                        [](const CenteredChiSquareMixed &) { return std::string("chi-square"); },
                        [](const QuadraticGaussian &) { return std::string("quadratic-gaussian"); },
                        [](const WignerSurrogate &) { return std::string("wigner"); },
                    },
                    spec);
}

void validate(const EnsembleSpec &spec) {
  std::visit(overloaded{
                 [](const GaussianIid &e) {
                   if (e.n < 1) throw ParameterError("gaussian: n must be positive");
                 },
                 [](const GaussianCorrelated &e) { check_mixing(e.mixing, "gaussian-correlated"); },
                 [](const CenteredBernoulliMixed &e) {
                   check_mixing(e.mixing, "bernoulli");
                   if (!(e.p > 0.0 && e.p < 1.0)) throw ParameterError("bernoulli: p must lie in (0, 1)");
                 },
                 [](const CenteredChiSquareMixed &e) {
                   check_mixing(e.mixing, "chi-square");
                   if (e.dof < 1) throw ParameterError("chi-square: dof must be >= 1");
                 },
                 [](const QuadraticGaussian &e) {
                   if (e.n < 1) throw ParameterError("quadratic-gaussian: n must be positive");
                 },
                 [](const WignerSurrogate &e) {
                   if (e.n < 1) throw ParameterError("wigner: n must be positive");
                 },
             },
             spec);
}

Eigen::MatrixXd sample_mixing(int n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("mixing matrix side must be positive");
  Rng rng = make_rng(seed);
  return standard_normal(n, n, rng);
}

MeasurementOperator sample_operator(const EnsembleSpec &spec, int m, std::uint64_t seed) {
  if (m < 1) throw ParameterError("sample_operator: m must be >= 1");
  validate(spec);
  Rng rng = make_rng(seed);
  const int n = ensemble_side(spec);

  MeasurementOperator op;
  op.spec = spec;
  op.seed = seed;

  std::visit(
      overloaded{
          [&](const GaussianIid &) { op.rows = standard_normal(m, n, rng); },
          [&](const GaussianCorrelated &e) {
            Eigen::MatrixXd raw = standard_normal(m, n, rng);
            op.rows.noalias() = raw * e.mixing.transpose();
          },
          [&](const CenteredBernoulliMixed &e) {
            std::bernoulli_distribution coin(e.p);
            const double sigma = std::sqrt(e.p * (1.0 - e.p));
            const double hi = (1.0 - e.p) / sigma;
            const double lo = -e.p / sigma;
            Eigen::MatrixXd raw(m, n);
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j)
                raw(i, j) = coin(rng) ? hi : lo;
            op.rows.noalias() = raw * e.mixing.transpose();
          },
          [&](const CenteredChiSquareMixed &e) {
            std::normal_distribution<double> normal;
            const double scale = 1.0 / std::sqrt(2.0 * e.dof);
            Eigen::MatrixXd raw(m, n);
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j) {
                double sum = 0.0;
                for (int d = 0; d < e.dof; ++d) {
                  const double g = normal(rng);
                  sum += g * g;
                }
                raw(i, j) = (sum - e.dof) * scale;
              }
            op.rows.noalias() = raw * e.mixing.transpose();
          },
          [&](const QuadraticGaussian &) {
            std::normal_distribution<double> normal;
            op.rows.resize(m, static_cast<Eigen::Index>(n) * n);
            Eigen::VectorXd a(n);
            for (int i = 0; i < m; ++i) {
              for (int j = 0; j < n; ++j) a(j) = normal(rng);
              for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c)
                  op.rows(i, r * n + c) = a(r) * a(c);
            }
          },
          [&](const WignerSurrogate &) {
            std::normal_distribution<double> normal;
            const double diag_sd = std::sqrt(2.0);
            op.rows.resize(m, static_cast<Eigen::Index>(n) * n);
            for (int i = 0; i < m; ++i) {
              for (int r = 0; r < n; ++r) {
                op.rows(i, r * n + r) = 1.0 + diag_sd * normal(rng);
                for (int c = r + 1; c < n; ++c) {
                  const double h = normal(rng);
                  op.rows(i, r * n + c) = h;
                  op.rows(i, c * n + r) = h;
                }
              }
            }
          },
      },
      spec);
  return op;
}

Eigen::VectorXd empirical_mean(const Eigen::MatrixXd &rows) {
  return rows.colwise().mean().transpose();
}

Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd &rows) {
  const Eigen::Index m = rows.rows();
  if (m < 2) throw ParameterError("empirical_covariance: need at least two rows");
  Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(m - 1);
}

MomentDeviation second_moment_match(const EnsembleSpec &a, const EnsembleSpec &b, int samples,
                                    std::uint64_t seed) {
  if (ensemble_row_length(a) != ensemble_row_length(b))
    throw ParameterError("second_moment_match: ensembles have different row lengths");
  if (samples < 2) throw ParameterError("second_moment_match: need at least two samples");
  const auto opa = sample_operator(a, samples, derive_seed(seed, {0}));
  const auto opb = sample_operator(b, samples, derive_seed(seed, {1}));
  MomentDeviation dev;
  dev.mean = (empirical_mean(opa.rows) - empirical_mean(opb.rows)).cwiseAbs().maxCoeff();
  dev.covariance =
      (empirical_covariance(opa.rows) - empirical_covariance(opb.rows)).cwiseAbs().maxCoeff();
  return dev;
}

AssumptionDiagnostics diagnose_rows(const Eigen::MatrixXd &rows, int n) {
  const Eigen::Index m = rows.rows();
  if (m < 30) throw ParameterError("diagnose: need m >= 30 samples");

  const Eigen::RowVectorXd mu = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mu;
  const double spread = centered.rowwise().squaredNorm().mean(); // avg ||a_i - mu||^2

  const Eigen::VectorXd power = rows.rowwise().squaredNorm();
  const double power_mean = power.mean();
  const double power_var = (power.array() - power_mean).square().sum() / static_cast<double>(m - 1);

  // tr(S^2) = ||C^T C||_F^2 / m^2 = ||C C^T||_F^2 / m^2 with C the centered rows.
  const Eigen::MatrixXd gram = centered.cols() <= m ? Eigen::MatrixXd(centered.transpose() * centered)
                                                     : Eigen::MatrixXd(centered * centered.transpose());
  const double trace_s = spread;
  const double trace_s2 = gram.squaredNorm() / (static_cast<double>(m) * m);

  AssumptionDiagnostics d;
  d.n = n;
  d.m = static_cast<int>(m);
  d.mean_ratio = mu.squaredNorm() / spread;
  d.power_ratio = power_var / (spread * spread);
  d.mean_ratio_se = std::sqrt(trace_s * trace_s + 2.0 * trace_s2) / (static_cast<double>(m) * trace_s);
  return d;
}

AssumptionDiagnostics diagnose(const EnsembleSpec &spec, int m, std::uint64_t seed) {
  if (m < 30) throw ParameterError("diagnose: need m >= 30 samples");
  const auto op = sample_operator(spec, m, seed);
  return diagnose_rows(op.rows, ensemble_side(spec));
}

} // namespace unirec
