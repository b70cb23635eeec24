#include "unirec/cli.hpp"
#include "unirec/ensembles.hpp"
#include "unirec/error.hpp"
#include "unirec/harness.hpp"
#include "unirec/solvers.hpp"
#include "unirec/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

namespace py = pybind11;
using namespace unirec;

namespace {

int infer_side(const PenaltySpec &penalty, Eigen::Index N) {
  if (!penalty_is_matrix(penalty)) return static_cast<int>(N);
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
  if (static_cast<Eigen::Index>(n) * n != N) throw ParameterError("matrix penalty needs a square number of columns");
  return n;
}

py::dict solution_dict(const Solution &s) {
  py::dict d;
  d["estimate"] = s.estimate;
  d["objective"] = s.objective;
  d["rel_error"] = s.rel_error;
  d["iterations"] = s.iterations;
  d["status"] = to_string(s.status);
  d["constraint_residual"] = s.constraint_residual;
  d["ridge_used"] = s.ridge_used;
  return d;
}

py::dict cell_dict(const CellStats &c) {
  py::dict d;
  d["delta"] = c.delta;
  d["structure"] = c.structure;
  d["trials"] = c.trials;
  d["successes"] = c.successes;
  d["mean_rel_error"] = c.mean_rel_error;
  d["mean_iters"] = c.mean_iters;
  return d;
}

TruthKind truth_kind_from(const std::string &model, int n, int k, int r, bool psd) {
  switch (truth_model_from_string(model)) {
  case TruthModel::SparseVector: return SparseVector{n, k};
  case TruthModel::LowRankPsd: return LowRankPsd{n, r};
  case TruthModel::SparseSymmetric: return SparseSymmetric{n, k, psd};
  case TruthModel::SparseLowRankPsd: return SparseLowRankPsd{n, k, r};
  }
  throw ParameterError("unknown model " + model);
}

EnsembleSpec ensemble_from(const std::string &name, int n, std::uint64_t seed, double p, int dof,
                           const std::optional<Eigen::MatrixXd> &mixing) {
  EnsembleTemplate t;
  t.family = ensemble_family_from_string(name);
  t.p = p;
  t.dof = dof;
  EnsembleSpec spec = t.instantiate(n, derive_seed(seed, {1}));
  if (mixing) {
    std::visit(
        [&](auto &e) {
          if constexpr (requires { e.mixing; }) e.mixing = *mixing;
          else throw ParameterError(name + " takes no mixing matrix");
        },
        spec);
    validate(spec);
  }
  return spec;
}

} // namespace

PYBIND11_MODULE(_unirec, m) {
  m.doc() = "Phase-transition experiments for structured signal recovery";

  static py::exception<ParameterError> parameter_error(m, "ParameterError", PyExc_ValueError);
  static py::exception<DomainError> domain_error(m, "DomainError", PyExc_ValueError);
  static py::exception<FormatError> format_error(m, "FormatError", PyExc_ValueError);
  static py::exception<IoError> io_error(m, "IoError", PyExc_OSError);
  static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParameterError &e) {
      py::set_error(parameter_error, e.what());
    } catch (const DomainError &e) {
      py::set_error(domain_error, e.what());
    } catch (const FormatError &e) {
      py::set_error(format_error, e.what());
    } catch (const IoError &e) {
      py::set_error(io_error, e.what());
    } catch (const NumericalError &e) {
      py::set_error(numerical_error, e.what());
    }
  });

  // theory
  m.def("q_function", [](double t) { return q_function(t); }, py::arg("t"));
  m.def("q_inverse", py::overload_cast<double>(&q_inverse), py::arg("p"));
  m.def("sparse_delta_star", [](double s) {
    const auto th = sparse_delta_star(s);
    py::dict d;
    d["x_root"] = th.x_root;
    d["residual"] = th.residual;
    d["delta_statdim"] = th.delta_statdim;
    d["tau_star"] = th.tau_star;
    return d;
  }, py::arg("s"));
  m.def("lowrank_delta_star", &lowrank_delta_star, py::arg("r"));
  m.def("width_l1_mc", [](int n, int k, int samples, std::uint64_t seed) {
    const auto w = width_l1_mc(n, k, samples, seed);
    py::dict d;
    d["mean"] = w.mean;
    d["stderr"] = w.stderr_;
    d["samples"] = w.samples;
    return d;
  }, py::arg("n"), py::arg("k"), py::arg("samples") = 2000, py::arg("seed") = 0);
  m.def("sl_order", [](int k, int r, int n) { return sl_order(k, r, n).measurements; }, py::arg("k"), py::arg("r"),
        py::arg("n"));

  // proximal blocks and solvers
  m.def("soft_threshold", &soft_threshold, py::arg("v"), py::arg("t"));
  m.def("eigh", [](const Eigen::MatrixXd &S) {
    auto e = eigh(S);
    return py::make_tuple(e.values, e.vectors);
  }, py::arg("S"));
  m.def("project_psd", &project_psd, py::arg("X"));
  m.def("prox_trace_psd", &prox_trace_psd, py::arg("X"), py::arg("t"));
  m.def("project_affine", [](const Eigen::MatrixXd &A, const Eigen::VectorXd &y, const Eigen::VectorXd &v) {
    return AffineProjector(A, y).project(v);
  }, py::arg("A"), py::arg("y"), py::arg("v"));
  m.def("solve",
        [](const Eigen::MatrixXd &A, const Eigen::VectorXd &y, const std::string &penalty, double lam,
           std::optional<Eigen::VectorXd> truth, double rho, int max_iter, double eps_abs, double eps_rel,
           double success_threshold) {
          const PenaltySpec pen = penalty_from_name(penalty, lam);
          SolverConfig cfg{rho, max_iter, eps_abs, eps_rel, success_threshold};
          const int side = infer_side(pen, A.cols());
          Solution s;
          {
            py::gil_scoped_release release;
            s = solve(A, y, pen, side, cfg, truth ? &*truth : nullptr);
          }
          return solution_dict(s);
        },
        py::arg("A"), py::arg("y"), py::arg("penalty") = "l1", py::arg("lam") = 0.0, py::arg("truth") = py::none(),
        py::arg("rho") = 1.0, py::arg("max_iter") = 50000, py::arg("eps_abs") = 1e-6, py::arg("eps_rel") = 1e-6,
        py::arg("success_threshold") = 1e-3);
  m.def("solve_oracle_l1", [](const Eigen::MatrixXd &A, const Eigen::VectorXd &y) {
    auto r = solve_oracle_l1(A, y);
    return py::make_tuple(r.objective, r.minimizer);
  }, py::arg("A"), py::arg("y"));

  // ensembles and signals
  m.def("sample_operator",
        [](const std::string &ensemble, int n, int rows, std::uint64_t seed, double p, int dof,
           std::optional<Eigen::MatrixXd> mixing) {
          return sample_operator(ensemble_from(ensemble, n, seed, p, dof, mixing), rows, seed).rows;
        },
        py::arg("ensemble"), py::arg("n"), py::arg("m"), py::arg("seed") = 0, py::arg("p") = 0.8, py::arg("dof") = 1,
        py::arg("mixing") = py::none());
  m.def("sample_mixing", &sample_mixing, py::arg("n"), py::arg("seed") = 0);
  m.def("generate_truth",
        [](const std::string &model, int n, int k, int r, bool psd, std::uint64_t seed) -> py::object {
          auto rng = make_rng(seed);
          const auto t = generate_truth(truth_kind_from(model, n, k, r, psd), rng);
          if (!is_matrix_kind(t.kind)) return py::cast(t.values);
          return py::cast(Eigen::MatrixXd(devectorize(t.values, t.side())));
        },
        py::arg("model"), py::arg("n"), py::arg("k") = 0, py::arg("r") = 0, py::arg("psd") = false,
        py::arg("seed") = 0);
  m.def("diagnose",
        [](const std::string &ensemble, int n, int rows, std::uint64_t seed, double p, int dof) {
          const auto d = diagnose(ensemble_from(ensemble, n, seed, p, dof, std::nullopt), rows, seed);
          py::dict out;
          out["mean_ratio"] = d.mean_ratio;
          out["mean_ratio_se"] = d.mean_ratio_se;
          out["power_ratio"] = d.power_ratio;
          out["n"] = d.n;
          out["m"] = d.m;
          return out;
        },
        py::arg("ensemble"), py::arg("n"), py::arg("m"), py::arg("seed") = 0, py::arg("p") = 0.8, py::arg("dof") = 1);

  // experiments
  py::class_<PhaseGrid>(m, "PhaseGrid")
      .def_property_readonly("cells", [](const PhaseGrid &g) {
        py::list out;
        for (const auto &c : g.cells) out.append(cell_dict(c));
        return out;
      })
      .def_property_readonly("delta_axis", [](const PhaseGrid &g) { return g.plan.delta_axis; })
      .def_property_readonly("structure_axis", [](const PhaseGrid &g) { return g.plan.structure_axis; })
      .def("cell", [](const PhaseGrid &g, std::size_t di, std::size_t si) { return cell_dict(g.cell(di, si)); },
           py::arg("delta_index"), py::arg("structure_index"))
      .def("to_json", &grid_to_json)
      .def("save", &save_run, py::arg("path"))
      .def("__repr__", [](const PhaseGrid &g) {
        std::ostringstream os;
        os << "<PhaseGrid " << to_string(g.plan.truth) << " n=" << g.plan.n << " " << g.plan.delta_axis.size() << "x"
           << g.plan.structure_axis.size() << " cells>";
        return os.str();
      });

  m.def("sweep",
        [](const std::string &model, int n, std::vector<double> delta, std::vector<double> structure,
           const std::string &ensemble, std::optional<std::string> penalty, double lam, int trials,
           std::uint64_t seed, double p, int dof, bool psd_truth, int block, int threads, double rho, int max_iter,
           double eps_abs, double eps_rel, double success_threshold) {
          SweepPlan plan;
          plan.truth = truth_model_from_string(model);
          plan.ensemble.family = ensemble_family_from_string(ensemble);
          plan.ensemble.p = p;
          plan.ensemble.dof = dof;
          plan.penalty = penalty_from_name(penalty ? *penalty : penalty_name(default_penalty(plan.truth)), lam);
          plan.n = n;
          plan.delta_axis = std::move(delta);
          plan.structure_axis = std::move(structure);
          plan.trials = trials;
          plan.master_seed = seed;
          plan.psd_truth = psd_truth;
          plan.block = block;
          plan.solver = SolverConfig{rho, max_iter, eps_abs, eps_rel, success_threshold};
          plan.validate();
          py::gil_scoped_release release;
          return sweep(plan, threads);
        },
        py::arg("model"), py::arg("n"), py::arg("delta"), py::arg("structure"), py::arg("ensemble") = "gaussian",
        py::arg("penalty") = py::none(), py::arg("lam") = 1.0, py::arg("trials") = 10, py::arg("seed") = 0,
        py::arg("p") = 0.8, py::arg("dof") = 1, py::arg("psd_truth") = false, py::arg("block") = 0,
        py::arg("threads") = 0, py::arg("rho") = 1.0, py::arg("max_iter") = 50000, py::arg("eps_abs") = 1e-6,
        py::arg("eps_rel") = 1e-6, py::arg("success_threshold") = 1e-3);

  m.def("contour", [](const PhaseGrid &g, double level) {
    py::list out;
    for (const auto &pt : contour(g, level).points) {
      py::dict d;
      d["structure"] = pt.structure;
      d["delta_half"] = pt.delta_half ? py::cast(*pt.delta_half) : py::none();
      d["fit"] = to_string(pt.fit);
      d["slope"] = pt.slope;
      out.append(d);
    }
    return out;
  }, py::arg("grid"), py::arg("level") = 0.5);
  m.def("compare", [](const PhaseGrid &a, const PhaseGrid &b) {
    const auto rep = compare_universality(a, b);
    py::list rows;
    for (const auto &r : rep.rows) {
      py::dict d;
      d["structure"] = r.structure;
      d["a"] = r.a ? py::cast(*r.a) : py::none();
      d["b"] = r.b ? py::cast(*r.b) : py::none();
      d["deviation"] = r.deviation ? py::cast(*r.deviation) : py::none();
      rows.append(d);
    }
    py::dict out;
    out["max_deviation"] = rep.max_deviation;
    out["rows"] = rows;
    return out;
  }, py::arg("a"), py::arg("b"));
  m.def("load_run", &load_run, py::arg("path"));
  m.def("grid_from_json", &grid_from_json, py::arg("text"));

  m.def("run_cli", [](const std::vector<std::string> &args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
