#include "unirec/harness.hpp"

#include "unirec/error.hpp"
#include "unirec/solvers.hpp"
#include "unirec/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace unirec {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

namespace {

constexpr std::pair<EnsembleFamily, const char *> kFamilies[] = {
    {EnsembleFamily::GaussianIid, "gaussian"},
    {EnsembleFamily::GaussianCorrelated, "gaussian-correlated"},
    {EnsembleFamily::CenteredBernoulliMixed, "bernoulli"},
    {EnsembleFamily::CenteredChiSquareMixed, "chi-square"},
    {EnsembleFamily::QuadraticGaussian, "quadratic-gaussian"},
    {EnsembleFamily::WignerSurrogate, "wigner"},
};

constexpr std::pair<TruthModel, const char *> kModels[] = {
    {TruthModel::SparseVector, "sparse-vector"},
    {TruthModel::LowRankPsd, "lowrank-psd"},
    {TruthModel::SparseSymmetric, "sparse-symmetric"},
    {TruthModel::SparseLowRankPsd, "sparse-lowrank-psd"},
};

bool structure_is_rank(TruthModel model) {
  return model == TruthModel::LowRankPsd || model == TruthModel::SparseLowRankPsd;
}

} // namespace

std::string to_string(EnsembleFamily family) {
  for (const auto &[f, name] : kFamilies)
    if (f == family) return name;
  return "unknown";
}

EnsembleFamily ensemble_family_from_string(const std::string &name) {
  for (const auto &[f, n] : kFamilies)
    if (name == n) return f;
  throw ParameterError("unknown ensemble: " + name);
}

std::string to_string(TruthModel model) {
  for (const auto &[m, name] : kModels)
    if (m == model) return name;
  return "unknown";
}

TruthModel truth_model_from_string(const std::string &name) {
  for (const auto &[m, n] : kModels)
    if (name == n) return m;
  throw ParameterError("unknown truth model: " + name);
}

std::string to_string(ContourFit fit) { return fit == ContourFit::ProbitMl ? "ProbitMl" : "LinearInterp"; }

bool EnsembleTemplate::is_matrix() const {
  return family == EnsembleFamily::QuadraticGaussian || family == EnsembleFamily::WignerSurrogate;
}

EnsembleSpec EnsembleTemplate::instantiate(int n, std::uint64_t mixing_seed) const {
  switch (family) {
  case EnsembleFamily::GaussianIid: return GaussianIid{n};
  case EnsembleFamily::GaussianCorrelated: return GaussianCorrelated{sample_mixing(n, mixing_seed)};
  case EnsembleFamily::CenteredBernoulliMixed: return CenteredBernoulliMixed{p, sample_mixing(n, mixing_seed)};
  case EnsembleFamily::CenteredChiSquareMixed: return CenteredChiSquareMixed{dof, sample_mixing(n, mixing_seed)};
  case EnsembleFamily::QuadraticGaussian: return QuadraticGaussian{n};
  case EnsembleFamily::WignerSurrogate: return WignerSurrogate{n};
  }
  throw ParameterError("unknown ensemble family");
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

int SweepPlan::unknowns() const { return truth == TruthModel::SparseVector ? n : n * n; }

int SweepPlan::measurements(double delta) const {
  const double scale = truth == TruthModel::SparseSymmetric ? static_cast<double>(n) * n : static_cast<double>(n);
  return static_cast<int>(std::llround(delta * scale));
}

TruthKind SweepPlan::truth_kind(double structure) const {
  switch (truth) {
  case TruthModel::SparseVector: return SparseVector{n, static_cast<int>(std::llround(structure * n))};
  case TruthModel::LowRankPsd: return LowRankPsd{n, static_cast<int>(std::llround(structure))};
  case TruthModel::SparseSymmetric:
    return SparseSymmetric{n, static_cast<int>(std::llround(structure * n * n)), psd_truth};
  case TruthModel::SparseLowRankPsd: return SparseLowRankPsd{n, block, static_cast<int>(std::llround(structure))};
  }
  throw ParameterError("unknown truth model");
}

void SweepPlan::validate() const {
  if (n < 1) throw ParameterError("plan: n must be positive");
  if (trials < 1) throw ParameterError("plan: trials must be >= 1");
  if (delta_axis.empty() || structure_axis.empty()) throw ParameterError("plan: axes must be non-empty");
  for (const auto *axis : {&delta_axis, &structure_axis}) {
    for (double v : *axis)
      if (!std::isfinite(v)) throw ParameterError("plan: axis values must be finite");
    for (std::size_t i = 1; i < axis->size(); ++i)
      if (!((*axis)[i] > (*axis)[i - 1])) throw ParameterError("plan: axes must be strictly ascending");
  }
  solver.validate();
  unirec::validate(penalty);

  const bool matrix_truth = truth != TruthModel::SparseVector;
  if (ensemble.is_matrix() != matrix_truth)
    throw ParameterError("plan: ensemble " + to_string(ensemble.family) + " does not fit truth " + to_string(truth));
  if (penalty_is_matrix(penalty) != matrix_truth)
    throw ParameterError("plan: penalty " + penalty_name(penalty) + " does not fit truth " + to_string(truth));
  if ((truth == TruthModel::LowRankPsd || truth == TruthModel::SparseLowRankPsd) && !penalty_requires_psd(penalty))
    throw ParameterError("plan: PSD truth needs a PSD-constrained penalty");
  if (ensemble.family == EnsembleFamily::CenteredBernoulliMixed && !(ensemble.p > 0.0 && ensemble.p < 1.0))
    throw ParameterError("plan: bernoulli p must lie in (0, 1)");
  if (ensemble.family == EnsembleFamily::CenteredChiSquareMixed && ensemble.dof < 1)
    throw ParameterError("plan: chi-square dof must be >= 1");

  for (double d : delta_axis)
    if (measurements(d) < 1) throw ParameterError("plan: delta " + std::to_string(d) + " gives m = 0");
  for (double s : structure_axis) {
    if (structure_is_rank(truth) && std::abs(s - std::round(s)) > 1e-9)
      throw ParameterError("plan: rank axis values must be integers");
    unirec::validate(truth_kind(s));
  }
}

const CellStats &PhaseGrid::cell(std::size_t delta_index, std::size_t structure_index) const {
  return cells.at(structure_index * plan.delta_axis.size() + delta_index);
}

// ---------------------------------------------------------------------------
// Trials and sweeps
// ---------------------------------------------------------------------------

PenaltySpec default_penalty(TruthModel model) {
  switch (model) {
  case TruthModel::SparseVector: return L1{};
  case TruthModel::LowRankPsd: return TracePsd{};
  case TruthModel::SparseSymmetric: return L1Matrix{false};
  case TruthModel::SparseLowRankPsd: return L1PlusTracePsd{1.0};
  }
  return L1{};
}

std::uint64_t trial_seed(const SweepPlan &plan, std::size_t delta_index, std::size_t structure_index,
                         int trial_index) {
  return derive_seed(plan.master_seed, {delta_index, structure_index, static_cast<std::uint64_t>(trial_index)});
}

TrialResult run_trial(const SweepPlan &plan, std::size_t delta_index, std::size_t structure_index,
                      int trial_index) {
  if (delta_index >= plan.delta_axis.size() || structure_index >= plan.structure_axis.size() || trial_index < 0 ||
      trial_index >= plan.trials)
    throw ParameterError("run_trial: index out of range");

  const std::uint64_t seed = trial_seed(plan, delta_index, structure_index, trial_index);
  const EnsembleSpec spec = plan.ensemble.instantiate(plan.n, derive_seed(seed, {1}));
  Rng truth_rng = make_rng(derive_seed(seed, {2}));
  GroundTruth truth = generate_truth(plan.truth_kind(plan.structure_axis[structure_index]), truth_rng);
  MeasurementOperator op = sample_operator(spec, plan.measurements(plan.delta_axis[delta_index]), derive_seed(seed, {3}));
  const RecoveryProblem problem = make_problem(std::move(op), std::move(truth), plan.penalty);
  const Solution sol = solve(problem, plan.solver);

  TrialResult out;
  out.rel_error = sol.rel_error;
  out.iterations = sol.iterations;
  out.numerical_failure = sol.status == SolveStatus::NumericalFailure;
  out.success = !out.numerical_failure && sol.rel_error <= plan.solver.success_threshold;
  return out;
}

int default_threads() {
  if (const char *env = std::getenv("UNIREC_THREADS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

PhaseGrid aggregate(const SweepPlan &plan, const std::vector<TrialResult> &trials) {
  const std::size_t nd = plan.delta_axis.size(), ns = plan.structure_axis.size();
  const auto per_cell = static_cast<std::size_t>(plan.trials);
  if (trials.size() != nd * ns * per_cell) throw ParameterError("aggregate: trial buffer has the wrong size");
  PhaseGrid grid;
  grid.plan = plan;
  grid.cells.reserve(nd * ns);
  for (std::size_t si = 0; si < ns; ++si)
    for (std::size_t di = 0; di < nd; ++di) {
      CellStats cell;
      cell.delta = plan.delta_axis[di];
      cell.structure = plan.structure_axis[si];
      cell.trials = plan.trials;
      double err = 0.0, iters = 0.0;
      const std::size_t base = (si * nd + di) * per_cell;
      for (std::size_t t = 0; t < per_cell; ++t) {
        const TrialResult &r = trials[base + t];
        cell.successes += r.success ? 1 : 0;
        err += r.rel_error;
        iters += r.iterations;
      }
      cell.mean_rel_error = err / plan.trials;
      cell.mean_iters = iters / plan.trials;
      grid.cells.push_back(cell);
    }
  return grid;
}

PhaseGrid sweep(const SweepPlan &plan, int threads) {
  plan.validate();
  const std::size_t nd = plan.delta_axis.size(), ns = plan.structure_axis.size();
  const auto per_cell = static_cast<std::size_t>(plan.trials);
  const std::size_t total = nd * ns * per_cell;
  std::vector<TrialResult> results(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      const std::size_t cell = idx / per_cell;
      const int t = static_cast<int>(idx % per_cell);
      try {
        results[idx] = run_trial(plan, cell % nd, cell / nd, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  const int width = static_cast<int>(std::min<std::size_t>(threads > 0 ? threads : default_threads(), total));
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(plan, results);
}

// ---------------------------------------------------------------------------
// Contours
// ---------------------------------------------------------------------------

namespace {

struct ProbitTerms {
  double loglik = 0.0;
  double g0 = 0.0, g1 = 0.0;             // gradient
  double i00 = 0.0, i01 = 0.0, i11 = 0.0; // Fisher information
};

ProbitTerms probit_terms(double a, double b, const std::vector<double> &x, const std::vector<int> &succ,
                         const std::vector<int> &trials) {
  ProbitTerms t;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eta = std::clamp(a + b * x[i], -37.0, 37.0);
    const double p = q_function(-eta);  // Phi(eta)
    const double q = q_function(eta);   // 1 - Phi(eta)
    const double phi = gauss_pdf(eta);
    const double s = succ[i], f = trials[i] - succ[i];
    t.loglik += s * std::log(p) + f * std::log(q);
    const double score = s * phi / p - f * phi / q;
    t.g0 += score;
    t.g1 += score * x[i];
    const double w = trials[i] * phi * phi / (p * q);
    t.i00 += w;
    t.i01 += w * x[i];
    t.i11 += w * x[i] * x[i];
  }
  return t;
}

std::optional<double> interpolate_crossing(const std::vector<double> &delta, const std::vector<double> &rate,
                                           double level) {
  for (std::size_t i = 1; i < delta.size(); ++i)
    if (rate[i - 1] < level && rate[i] >= level)
      return delta[i - 1] + (level - rate[i - 1]) / (rate[i] - rate[i - 1]) * (delta[i] - delta[i - 1]);
  return std::nullopt;
}

} // namespace

ProbitFit fit_probit(const std::vector<double> &x, const std::vector<int> &successes, const std::vector<int> &trials) {
  ProbitFit fit;
  if (x.size() < 2 || successes.size() != x.size() || trials.size() != x.size()) return fit;
  // Centre and scale x for conditioning.
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double spread = 0.0;
  for (double v : x) spread = std::max(spread, std::abs(v - mean));
  if (!(spread > 0.0)) return fit;
  std::vector<double> xs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xs[i] = (x[i] - mean) / spread;

  double a = 0.0, b = 0.0;
  ProbitTerms cur = probit_terms(a, b, xs, successes, trials);
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const double det = cur.i00 * cur.i11 - cur.i01 * cur.i01;
    if (!(det > 0.0) || !std::isfinite(det)) break;
    const double da = (cur.i11 * cur.g0 - cur.i01 * cur.g1) / det;
    const double db = (cur.i00 * cur.g1 - cur.i01 * cur.g0) / det;
    double step = 1.0;
    ProbitTerms trial;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      trial = probit_terms(a + step * da, b + step * db, xs, successes, trials);
      if (trial.loglik >= cur.loglik - 1e-12) {
        improved = true;
        break;
      }
      step /= 2.0;
    }
    if (!improved) break;
    a += step * da;
    b += step * db;
    cur = trial;
    if (std::abs(step * da) < 1e-10 && std::abs(step * db) < 1e-10) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(a) || !std::isfinite(b)) return fit;
  fit.slope = b / spread;
  fit.intercept = a - fit.slope * mean;
  fit.ok = true;
  return fit;
}

ContourCurve contour(const PhaseGrid &grid, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("contour: level must lie in (0, 1)");
  const auto &plan = grid.plan;
  const std::size_t nd = plan.delta_axis.size();
  if (grid.cells.size() != nd * plan.structure_axis.size()) throw ParameterError("contour: grid is incomplete");
  const double lo = plan.delta_axis.front(), hi = plan.delta_axis.back();

  ContourCurve curve;
  for (std::size_t si = 0; si < plan.structure_axis.size(); ++si) {
    std::vector<double> rate(nd);
    std::vector<int> succ(nd), trials(nd);
    int mixed = 0;
    for (std::size_t di = 0; di < nd; ++di) {
      const CellStats &c = grid.cell(di, si);
      succ[di] = c.successes;
      trials[di] = c.trials;
      rate[di] = c.rate();
      if (c.successes > 0 && c.successes < c.trials) ++mixed;
    }

    ContourPoint point;
    point.structure = plan.structure_axis[si];
    const auto crossing = interpolate_crossing(plan.delta_axis, rate, level);
    if (crossing && mixed >= 2) {
      const ProbitFit fit = fit_probit(plan.delta_axis, succ, trials);
      if (fit.ok && fit.slope > 0.0) {
        const double target = -q_inverse(level); // Phi^{-1}(level)
        const double d = (target - fit.intercept) / fit.slope;
        if (d >= lo && d <= hi) {
          point.delta_half = d;
          point.fit = ContourFit::ProbitMl;
          point.slope = fit.slope;
        }
      }
    }
    if (!point.delta_half && crossing) {
      point.delta_half = crossing;
      point.fit = ContourFit::LinearInterp;
    }
    curve.points.push_back(point);
  }
  return curve;
}

UniversalityReport compare_universality(const PhaseGrid &a, const PhaseGrid &b) {
  const auto &pa = a.plan, &pb = b.plan;
  if (pa.delta_axis != pb.delta_axis || pa.structure_axis != pb.structure_axis)
    throw ParameterError("compare: grids have different axes");
  if (pa.n != pb.n || pa.truth != pb.truth || penalty_name(pa.penalty) != penalty_name(pb.penalty) ||
      pa.trials != pb.trials)
    throw ParameterError("compare: plans differ beyond the ensemble");

  const ContourCurve ca = contour(a), cb = contour(b);
  UniversalityReport report;
  for (std::size_t i = 0; i < ca.points.size(); ++i) {
    UniversalityReport::Row row;
    row.structure = ca.points[i].structure;
    row.a = ca.points[i].delta_half;
    row.b = cb.points[i].delta_half;
    if (row.a && row.b) {
      row.deviation = std::abs(*row.a - *row.b);
      report.max_deviation = std::max(report.max_deviation, *row.deviation);
    } else if (row.a.has_value() != row.b.has_value()) {
      report.max_deviation = std::numeric_limits<double>::infinity();
    }
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

ordered_json penalty_to_json(const PenaltySpec &penalty) {
  ordered_json j;
  j["name"] = penalty_name(penalty);
  if (const auto *p = std::get_if<L1PlusTracePsd>(&penalty)) j["lambda"] = p->lambda;
  return j;
}

PenaltySpec penalty_from_json(const ordered_json &j) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "l1") return L1{};
  if (name == "trace-psd") return TracePsd{};
  if (name == "l1-matrix") return L1Matrix{false};
  if (name == "l1-matrix-psd") return L1Matrix{true};
  if (name == "l1-plus-trace-psd") return L1PlusTracePsd{j.at("lambda").get<double>()};
  throw FormatError("unknown penalty: " + name);
}

ordered_json plan_to_json(const SweepPlan &plan) {
  ordered_json j;
  j["ensemble"] = {{"family", to_string(plan.ensemble.family)}, {"p", plan.ensemble.p}, {"dof", plan.ensemble.dof}};
  j["truth"] = to_string(plan.truth);
  j["psd_truth"] = plan.psd_truth;
  j["block"] = plan.block;
  j["penalty"] = penalty_to_json(plan.penalty);
  j["n"] = plan.n;
  j["delta_axis"] = plan.delta_axis;
  j["structure_axis"] = plan.structure_axis;
  j["trials"] = plan.trials;
  j["master_seed"] = plan.master_seed;
  j["solver"] = {{"rho", plan.solver.rho},
                 {"max_iter", plan.solver.max_iter},
                 {"eps_abs", plan.solver.eps_abs},
                 {"eps_rel", plan.solver.eps_rel},
                 {"success_threshold", plan.solver.success_threshold}};
  return j;
}

SweepPlan plan_from_json(const ordered_json &j) {
  SweepPlan plan;
  const auto &e = j.at("ensemble");
  plan.ensemble.family = ensemble_family_from_string(e.at("family").get<std::string>());
  plan.ensemble.p = e.at("p").get<double>();
  plan.ensemble.dof = e.at("dof").get<int>();
  plan.truth = truth_model_from_string(j.at("truth").get<std::string>());
  plan.psd_truth = j.at("psd_truth").get<bool>();
  plan.block = j.at("block").get<int>();
  plan.penalty = penalty_from_json(j.at("penalty"));
  plan.n = j.at("n").get<int>();
  plan.delta_axis = j.at("delta_axis").get<std::vector<double>>();
  plan.structure_axis = j.at("structure_axis").get<std::vector<double>>();
  plan.trials = j.at("trials").get<int>();
  plan.master_seed = j.at("master_seed").get<std::uint64_t>();
  const auto &s = j.at("solver");
  plan.solver.rho = s.at("rho").get<double>();
  plan.solver.max_iter = s.at("max_iter").get<int>();
  plan.solver.eps_abs = s.at("eps_abs").get<double>();
  plan.solver.eps_rel = s.at("eps_rel").get<double>();
  plan.solver.success_threshold = s.at("success_threshold").get<double>();
  return plan;
}

} // namespace

std::string grid_to_json(const PhaseGrid &grid) {
  ordered_json j;
  j["format_version"] = kGridFormatVersion;
  j["plan"] = plan_to_json(grid.plan);
  ordered_json cells = ordered_json::array();
  for (const auto &c : grid.cells)
    cells.push_back({{"delta", c.delta},
                     {"structure", c.structure},
                     {"trials", c.trials},
                     {"successes", c.successes},
                     {"mean_rel_error", c.mean_rel_error},
                     {"mean_iters", c.mean_iters}});
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

PhaseGrid grid_from_json(const std::string &text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception &ex) {
    throw FormatError(std::string("grid JSON: ") + ex.what());
  }
  try {
    if (!j.is_object() || !j.contains("format_version")) throw FormatError("grid JSON: missing format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kGridFormatVersion)
      throw FormatError("grid JSON: unsupported format_version " + std::to_string(version));
    PhaseGrid grid;
    grid.plan = plan_from_json(j.at("plan"));
    for (const auto &c : j.at("cells")) {
      CellStats cell;
      cell.delta = c.at("delta").get<double>();
      cell.structure = c.at("structure").get<double>();
      cell.trials = c.at("trials").get<int>();
      cell.successes = c.at("successes").get<int>();
      cell.mean_rel_error = c.at("mean_rel_error").get<double>();
      cell.mean_iters = c.at("mean_iters").get<double>();
      if (cell.successes < 0 || cell.successes > cell.trials) throw FormatError("grid JSON: successes exceed trials");
      grid.cells.push_back(cell);
    }
    if (grid.cells.size() != grid.plan.delta_axis.size() * grid.plan.structure_axis.size())
      throw FormatError("grid JSON: cell count does not match the plan axes");
    return grid;
  } catch (const nlohmann::json::exception &ex) {
    throw FormatError(std::string("grid JSON: ") + ex.what());
  } catch (const ParameterError &ex) {
    throw FormatError(std::string("grid JSON: ") + ex.what());
  }
}

void save_run(const PhaseGrid &grid, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << grid_to_json(grid);
  if (!out) throw IoError("failed writing " + path);
}

PhaseGrid load_run(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return grid_from_json(buf.str());
}

std::string contour_csv(const ContourCurve &curve) {
  std::string out = "structure,delta_half,fit\n";
  char buf[64];
  auto put = [&](double v) { out.append(buf, std::to_chars(buf, buf + sizeof buf, v).ptr); };
  for (const auto &p : curve.points) {
    put(p.structure);
    out += ",";
    if (p.delta_half) {
      put(*p.delta_half);
      out += "," + to_string(p.fit) + "\n";
    } else {
      out += ",none\n";
    }
  }
  return out;
}

ContourCurve parse_contour_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "structure,delta_half,fit") throw FormatError("contour CSV: bad header");
  ContourCurve curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw FormatError("contour CSV: malformed row '" + line + "'");
    ContourPoint p;
    try {
      p.structure = std::stod(line.substr(0, c1));
      const std::string half = line.substr(c1 + 1, c2 - c1 - 1);
      if (!half.empty()) p.delta_half = std::stod(half);
    } catch (const std::exception &) {
      throw FormatError("contour CSV: non-numeric value in '" + line + "'");
    }
    const std::string fit = line.substr(c2 + 1);
    if (fit == "ProbitMl")
      p.fit = ContourFit::ProbitMl;
    else if (fit == "LinearInterp" || fit == "none")
      p.fit = ContourFit::LinearInterp;
    else
      throw FormatError("contour CSV: unknown fit '" + fit + "'");
    curve.points.push_back(p);
  }
  return curve;
}

} // namespace unirec
