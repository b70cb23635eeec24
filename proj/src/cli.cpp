#include "unirec/cli.hpp"

#include "unirec/ensembles.hpp"
#include "unirec/error.hpp"
#include "unirec/harness.hpp"
#include "unirec/plot.hpp"
#include "unirec/theory.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace unirec {

std::vector<double> parse_range(const std::string &text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty() || parts.size() > 3) throw ParameterError("bad range '" + text + "'");
  std::vector<double> v;
  try {
    for (const auto &p : parts) {
      std::size_t used = 0;
      v.push_back(std::stod(p, &used));
      if (used != p.size()) throw ParameterError("bad range '" + text + "'");
    }
  } catch (const std::logic_error &) {
    throw ParameterError("bad range '" + text + "'");
  }
  if (v.size() == 1) return v;
  const double start = v[0], stop = v[1], step = v.size() == 3 ? v[2] : 1.0;
  if (!(step > 0.0) || stop < start) throw ParameterError("bad range '" + text + "'");
  std::vector<double> out;
  for (long long i = 0;; ++i) {
    const double x = start + static_cast<double>(i) * step;
    if (x > stop + 1e-9) break;
    out.push_back(std::round(x * 1e12) / 1e12);
    if (out.size() > 1000000) throw ParameterError("range '" + text + "' is too long");
  }
  return out;
}

namespace {

std::string fmt(double v, const char *spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void write_text(const std::string &path, const std::string &text, std::ostream &out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << text;
  if (!file) throw IoError("failed writing " + path);
}

std::vector<int> integer_axis(const std::string &text) {
  std::vector<int> out;
  for (double v : parse_range(text)) {
    if (std::abs(v - std::round(v)) > 1e-9) throw ParameterError("expected integers in '" + text + "'");
    out.push_back(static_cast<int>(std::llround(v)));
  }
  return out;
}

struct TheoryArgs {
  std::string curve;
  std::string s = "0.05:0.95:0.05";
  std::string r = "1:4";
  int k = 0, n = 0;
  std::string out;
};

int cmd_theory(const TheoryArgs &a, std::ostream &out, std::ostream &err) {
  if (a.curve == "l1") {
    const auto axis = parse_range(a.s);
    for (double s : axis)
      if (!(s > 0.0 && s < 1.0)) throw ParameterError("--s values must lie in (0, 1)");
    write_text(a.out, theory_csv({l1_curve(axis, TheoryMethod::StatDimL1), l1_curve(axis, TheoryMethod::EqDeltaRoot)}),
               out);
  } else if (a.curve == "lowrank") {
    const auto axis = integer_axis(a.r);
    for (int r : axis)
      if (r < 0) throw ParameterError("--r values must be >= 0");
    write_text(a.out, theory_csv({lowrank_curve(axis)}), out);
  } else if (a.curve == "sl-order") {
    const auto ranks = integer_axis(a.r.empty() ? "1" : a.r);
    if (ranks.size() != 1) throw ParameterError("sl-order takes a single --r");
    const OrderEstimate est = sl_order(a.k, ranks.front(), a.n);
    TheoryCurve c;
    c.method = TheoryMethod::OrderMinK2Rn;
    c.structure_axis = {static_cast<double>(a.k)};
    c.delta_star = {static_cast<double>(est.measurements)};
    write_text(a.out, theory_csv({c}), out);
    err << "ORDER-ONLY: min(k^2, r n) = " << est.measurements << " measurements, no constant known\n";
  } else {
    throw ParameterError("--curve must be l1, lowrank or sl-order");
  }
  return kExitOk;
}

struct SweepArgs {
  std::string model = "sparse-vector";
  std::string ensemble = "gaussian";
  std::string penalty;
  double lambda = 1.0;
  int n = 0;
  std::string delta;
  std::string s, r;
  int trials = 10;
  std::uint64_t seed = 0;
  double p = 0.8;
  int dof = 1;
  bool psd_truth = false;
  int block = 0;
  SolverConfig solver;
  int threads = 0;
  std::string out;
};

int cmd_sweep(const SweepArgs &a, std::ostream &out, std::ostream &err) {
  SweepPlan plan;
  plan.truth = truth_model_from_string(a.model);
  plan.ensemble.family = ensemble_family_from_string(a.ensemble);
  plan.ensemble.p = a.p;
  plan.ensemble.dof = a.dof;
  plan.penalty = penalty_from_name(a.penalty.empty() ? penalty_name(default_penalty(plan.truth)) : a.penalty, a.lambda);
  plan.n = a.n;
  if (a.delta.empty()) throw ParameterError("--delta is required");
  plan.delta_axis = parse_range(a.delta);
  const bool rank_axis = plan.truth == TruthModel::LowRankPsd || plan.truth == TruthModel::SparseLowRankPsd;
  const std::string &structure = rank_axis ? a.r : a.s;
  if (structure.empty()) throw ParameterError(rank_axis ? "--r is required for this model" : "--s is required");
  plan.structure_axis = parse_range(structure);
  plan.trials = a.trials;
  plan.master_seed = a.seed;
  plan.psd_truth = a.psd_truth;
  plan.block = a.block;
  plan.solver = a.solver;
  plan.validate();

  const PhaseGrid grid = sweep(plan, a.threads);
  if (!a.out.empty()) save_run(grid, a.out);

  const ContourCurve curve = contour(grid);
  err << "structure  cells  successes/trials  delta_half\n";
  for (std::size_t si = 0; si < plan.structure_axis.size(); ++si) {
    int succ = 0, total = 0;
    for (std::size_t di = 0; di < plan.delta_axis.size(); ++di) {
      succ += grid.cell(di, si).successes;
      total += grid.cell(di, si).trials;
    }
    const auto &pt = curve.points[si];
    err << fmt(plan.structure_axis[si]) << "  " << plan.delta_axis.size() << "  " << succ << "/" << total << "  "
        << (pt.delta_half ? fmt(*pt.delta_half) + " (" + to_string(pt.fit) + ")" : std::string("none")) << "\n";
  }
  if (a.out.empty()) out << grid_to_json(grid);
  return kExitOk;
}

EnsembleSpec ensemble_for_diagnose(const std::string &name, int n, double p, int dof, std::uint64_t seed) {
  EnsembleTemplate t;
  t.family = ensemble_family_from_string(name);
  t.p = p;
  t.dof = dof;
  return t.instantiate(n, derive_seed(seed, {0xd1a9}));
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Phase-transition laboratory for structured signal recovery"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  TheoryArgs theory;
  auto *theory_cmd = app.add_subcommand("theory", "Theoretical recovery thresholds as CSV");
  theory_cmd->add_option("--curve", theory.curve, "l1 | lowrank | sl-order")->required();
  theory_cmd->add_option("--s", theory.s, "Sparsity fractions (start:stop:step)");
  theory_cmd->add_option("--r", theory.r, "Ranks for lowrank (start:stop[:step]); rank for sl-order");
  theory_cmd->add_option("--k", theory.k, "Support side (sl-order)");
  theory_cmd->add_option("--n", theory.n, "Matrix side (sl-order)");
  theory_cmd->add_option("-o,--out", theory.out, "Output CSV (default stdout)");

  SweepArgs sw;
  auto *sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep over a (delta, structure) grid");
  sweep_cmd->add_option("--model", sw.model, "sparse-vector | lowrank-psd | sparse-symmetric | sparse-lowrank-psd");
  sweep_cmd->add_option("--ensemble", sw.ensemble,
                        "gaussian | gaussian-correlated | bernoulli | chi-square | quadratic-gaussian | wigner");
  sweep_cmd->add_option("--penalty", sw.penalty, "l1 | trace-psd | l1-matrix | l1-matrix-psd | l1-plus-trace-psd");
  sweep_cmd->add_option("--lambda", sw.lambda, "Trace weight for l1-plus-trace-psd");
  sweep_cmd->add_option("--n", sw.n, "Signal dimension or matrix side")->required();
  sweep_cmd->add_option("--delta", sw.delta, "Oversampling ratios (start:stop:step)")->required();
  sweep_cmd->add_option("--s", sw.s, "Sparsity fractions (sparse models)");
  sweep_cmd->add_option("--r", sw.r, "Ranks (low-rank models)");
  sweep_cmd->add_option("--trials", sw.trials, "Trials per cell");
  sweep_cmd->add_option("--seed", sw.seed, "Master seed");
  sweep_cmd->add_option("--p", sw.p, "Bernoulli success probability");
  sweep_cmd->add_option("--dof", sw.dof, "Chi-square degrees of freedom");
  sweep_cmd->add_flag("--psd-truth", sw.psd_truth, "Generate PSD sparse-symmetric signals");
  sweep_cmd->add_option("--block", sw.block, "Support side for sparse-lowrank-psd");
  sweep_cmd->add_option("--rho", sw.solver.rho, "ADMM step weight");
  sweep_cmd->add_option("--max-iter", sw.solver.max_iter, "ADMM iteration cap");
  sweep_cmd->add_option("--eps-abs", sw.solver.eps_abs, "Absolute residual tolerance");
  sweep_cmd->add_option("--eps-rel", sw.solver.eps_rel, "Relative residual tolerance");
  sweep_cmd->add_option("--success-threshold", sw.solver.success_threshold, "Relative error counted as recovery");
  sweep_cmd->add_option("--threads", sw.threads, "Worker threads (default UNIREC_THREADS or all cores)");
  sweep_cmd->add_option("-o,--out", sw.out, "Output grid JSON (default stdout)");

  std::string contour_grid, contour_out;
  double level = 0.5;
  auto *contour_cmd = app.add_subcommand("contour", "50% success contour of a grid as CSV");
  contour_cmd->add_option("--grid", contour_grid, "Grid JSON")->required();
  contour_cmd->add_option("--level", level, "Success level");
  contour_cmd->add_option("-o,--out", contour_out, "Output CSV (default stdout)");

  std::string grid_a, grid_b;
  auto *compare_cmd = app.add_subcommand("compare", "Contour deviation between two grids");
  compare_cmd->add_option("a", grid_a, "First grid JSON")->required();
  compare_cmd->add_option("b", grid_b, "Second grid JSON")->required();

  std::string diag_ensemble = "gaussian";
  int diag_n = 0, diag_m = 0, diag_dof = 1;
  double diag_p = 0.8;
  std::uint64_t diag_seed = 0;
  auto *diagnose_cmd = app.add_subcommand("diagnose", "Empirical bounded-mean / bounded-power statistics");
  diagnose_cmd->add_option("--ensemble", diag_ensemble, "Ensemble name");
  diagnose_cmd->add_option("--n", diag_n, "Side length")->required();
  diagnose_cmd->add_option("--m", diag_m, "Number of sampled rows (>= 30)")->required();
  diagnose_cmd->add_option("--p", diag_p, "Bernoulli success probability");
  diagnose_cmd->add_option("--dof", diag_dof, "Chi-square degrees of freedom");
  diagnose_cmd->add_option("--seed", diag_seed, "Seed");

  PlotSpec plot_spec;
  std::string color_map = "success";
  auto *plot_cmd = app.add_subcommand("plot", "SVG heatmap of a grid with theory overlays");
  plot_cmd->add_option("--grid", plot_spec.grid_path, "Grid JSON")->required();
  plot_cmd->add_option("--theory", plot_spec.theory_csv, "Theory CSV overlay (repeatable)");
  plot_cmd->add_option("-o,--out", plot_spec.output, "Output SVG")->required();
  plot_cmd->add_option("--title", plot_spec.title, "Figure title");
  plot_cmd->add_option("--color-map", color_map, "success | error");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*theory_cmd) return cmd_theory(theory, out, err);
    if (*sweep_cmd) {
      if (sw.threads < 0) throw ParameterError("--threads must be >= 0");
      return cmd_sweep(sw, out, err);
    }
    if (*contour_cmd) {
      const PhaseGrid grid = load_run(contour_grid);
      write_text(contour_out, contour_csv(contour(grid, level)), out);
      return kExitOk;
    }
    if (*compare_cmd) {
      const UniversalityReport rep = compare_universality(load_run(grid_a), load_run(grid_b));
      out << "max_deviation " << fmt(rep.max_deviation) << "\n";
      out << "structure,delta_half_a,delta_half_b,deviation\n";
      for (const auto &row : rep.rows)
        out << fmt(row.structure) << "," << (row.a ? fmt(*row.a) : "") << "," << (row.b ? fmt(*row.b) : "") << ","
            << (row.deviation ? fmt(*row.deviation) : "") << "\n";
      return kExitOk;
    }
    if (*diagnose_cmd) {
      const EnsembleSpec spec = ensemble_for_diagnose(diag_ensemble, diag_n, diag_p, diag_dof, diag_seed);
      const AssumptionDiagnostics d = diagnose(spec, diag_m, diag_seed);
      out << "ensemble " << ensemble_name(spec) << "\n";
      out << "n " << d.n << "\nm " << d.m << "\n";
      out << "mean_ratio " << fmt(d.mean_ratio, "%.8g") << "\n";
      out << "mean_ratio_se " << fmt(d.mean_ratio_se, "%.8g") << "\n";
      out << "power_ratio " << fmt(d.power_ratio, "%.8g") << "\n";
      out << "n_power_ratio " << fmt(d.n * d.power_ratio, "%.8g") << "\n";
      return kExitOk;
    }
    if (*plot_cmd) {
      if (color_map == "success")
        plot_spec.color_map = ColorMap::SuccessRate;
      else if (color_map == "error")
        plot_spec.color_map = ColorMap::MeanRelError;
      else
        throw ParameterError("--color-map must be success or error");
      plot(plot_spec);
      return kExitOk;
    }
  } catch (const IoError &e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ParameterError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

} // namespace unirec
