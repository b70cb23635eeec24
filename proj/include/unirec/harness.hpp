#pragma once

#include "unirec/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace unirec {

/// Ensemble family for a sweep. The mixed families draw a fresh standard
/// normal mixing matrix per trial.
enum class EnsembleFamily {
  GaussianIid,
  GaussianCorrelated,
  CenteredBernoulliMixed,
  CenteredChiSquareMixed,
  QuadraticGaussian,
  WignerSurrogate,
};

struct EnsembleTemplate {
  EnsembleFamily family = EnsembleFamily::GaussianIid;
  double p = 0.8; // Bernoulli success probability
  int dof = 1;    // chi-square degrees of freedom

  /// Instantiates the ensemble at side n; `mixing_seed` seeds M when needed.
  EnsembleSpec instantiate(int n, std::uint64_t mixing_seed) const;
  bool is_matrix() const;
};

std::string to_string(EnsembleFamily family);
EnsembleFamily ensemble_family_from_string(const std::string &name);

/// How the structure axis is read for each cell.
enum class TruthModel {
  SparseVector,     // structure = s, k = round(s n)
  LowRankPsd,       // structure = r
  SparseSymmetric,  // structure = s, k = round(s n^2)
  SparseLowRankPsd, // structure = r, with `block` as the support side
};

std::string to_string(TruthModel model);
TruthModel truth_model_from_string(const std::string &name);

/// Penalty a sweep uses when none is given: l1, trace-psd, l1-matrix and
/// l1-plus-trace-psd (lambda = 1) respectively.
PenaltySpec default_penalty(TruthModel model);

struct SweepPlan {
  EnsembleTemplate ensemble;
  TruthModel truth = TruthModel::SparseVector;
  PenaltySpec penalty = L1{};
  int n = 0;
  std::vector<double> delta_axis;
  std::vector<double> structure_axis;
  int trials = 1;
  std::uint64_t master_seed = 0;
  SolverConfig solver;
  bool psd_truth = false; // SparseSymmetric psd flag
  int block = 0;          // SparseLowRankPsd support side

  /// Throws ParameterError on unsorted axes, m = 0 cells, bad structure
  /// values or a penalty incompatible with the truth model.
  void validate() const;

  /// m = round(delta n) for vectors and low-rank, round(delta n^2) for sparse matrices.
  int measurements(double delta) const;
  TruthKind truth_kind(double structure) const;
  int unknowns() const;
};

struct TrialResult {
  bool success = false;
  double rel_error = 0.0;
  int iterations = 0;
  bool numerical_failure = false;
};

struct CellStats {
  double delta = 0.0;
  double structure = 0.0;
  int trials = 0;
  int successes = 0;
  double mean_rel_error = 0.0;
  double mean_iters = 0.0;

  double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

/// Cells are stored structure-major: index = structure_index * |delta| + delta_index.
struct PhaseGrid {
  SweepPlan plan;
  std::vector<CellStats> cells;

  const CellStats &cell(std::size_t delta_index, std::size_t structure_index) const;
};

/// One seeded trial: draw M (if any), truth and operator, solve, threshold.
TrialResult run_trial(const SweepPlan &plan, std::size_t delta_index, std::size_t structure_index,
                      int trial_index);

std::uint64_t trial_seed(const SweepPlan &plan, std::size_t delta_index,
                         std::size_t structure_index, int trial_index);

/// Runs every trial over `threads` workers (0 = hardware concurrency).
/// Aggregation is keyed by index, so the grid does not depend on `threads`.
PhaseGrid sweep(const SweepPlan &plan, int threads = 0);

/// Aggregates an indexed trial buffer (cell-major, trial-minor) into a grid.
PhaseGrid aggregate(const SweepPlan &plan, const std::vector<TrialResult> &trials);

enum class ContourFit { ProbitMl, LinearInterp };

std::string to_string(ContourFit fit);

struct ContourPoint {
  double structure = 0.0;
  std::optional<double> delta_half;
  ContourFit fit = ContourFit::LinearInterp;
  double slope = 0.0; // probit slope in delta (ProbitMl only)
};

struct ContourCurve {
  std::vector<ContourPoint> points;
};

/// Probit maximum-likelihood fit per structure column; linear interpolation
/// when fewer than two cells are mixed or the fit is unusable; absent when
/// the success rate never crosses `level`.
ContourCurve contour(const PhaseGrid &grid, double level = 0.5);

struct ProbitFit {
  double intercept = 0.0;
  double slope = 0.0;
  bool ok = false;
};

/// ML fit of P(success) = Phi(intercept + slope * x) to binomial counts.
ProbitFit fit_probit(const std::vector<double> &x, const std::vector<int> &successes,
                     const std::vector<int> &trials);

struct UniversalityReport {
  /// max |delta_half_A - delta_half_B| over shared structure values; infinite
  /// if a column crosses the level in one grid but not the other.
  double max_deviation = 0.0;
  struct Row {
    double structure = 0.0;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> deviation;
  };
  std::vector<Row> rows;
};

/// Throws ParameterError unless the plans agree on everything except the ensemble.
UniversalityReport compare_universality(const PhaseGrid &a, const PhaseGrid &b);

// Persistence: versioned JSON, matrices never stored.

inline constexpr int kGridFormatVersion = 1;

std::string grid_to_json(const PhaseGrid &grid);
PhaseGrid grid_from_json(const std::string &text);
void save_run(const PhaseGrid &grid, const std::string &path);
PhaseGrid load_run(const std::string &path);

/// CSV with header `structure,delta_half,fit`; absent points have an empty delta_half.
std::string contour_csv(const ContourCurve &curve);
ContourCurve parse_contour_csv(const std::string &text);

/// Worker count used when a caller passes 0: UNIREC_THREADS if set, else
/// the hardware concurrency.
int default_threads();

} // namespace unirec
