// Python bindings for the core operations: ensemble construction,
// column selection, bifidelity fitting/evaluation, recovery
// diagnostics and the on-disk ensemble format.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

#include "mfalloc/bifidelity.hpp"
#include "mfalloc/ensemble_io.hpp"
#include "mfalloc/linalg.hpp"
#include "mfalloc/models.hpp"
#include "mfalloc/selectors.hpp"
#include "mfalloc/theory.hpp"

namespace py = pybind11;
using namespace mfalloc;

namespace {

SelectorConfig make_config(const std::string& method, Index size,
                           std::optional<double> lambda, double epsilon,
                           Index rank, std::uint64_t seed, bool normalize) {
  SelectorConfig cfg;
  cfg.method = parse_method(method);
  cfg.target_size = size;
  cfg.gomp_lambda = lambda;
  cfg.gomp_epsilon = epsilon;
  cfg.leverage_rank = rank;
  cfg.rng_seed = seed;
  cfg.normalize_columns = normalize;
  return cfg;
}

Fidelity parse_fidelity(const std::string& name) {
  if (name == "low") return Fidelity::low;
  if (name == "high") return Fidelity::high;
  throw std::invalid_argument("unknown fidelity '" + name + "' (valid: low, high)");
}

PendulumFidelity parse_pendulum_fidelity(const std::string& name) {
  if (name == "nonlinear") return PendulumFidelity::nonlinear;
  if (name == "linear") return PendulumFidelity::linear;
  throw std::invalid_argument("unknown pendulum fidelity '" + name +
                              "' (valid: nonlinear, linear)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "column subset selection for bifidelity surrogates";

  py::register_exception<SolveFailure>(m, "SolveFailure", PyExc_RuntimeError);

  // --- ensembles and IO -----------------------------------------------------

  py::class_<Ensemble>(m, "Ensemble")
      .def(py::init<>())
      .def_readwrite("snapshots", &Ensemble::snapshots)
      .def_readwrite("parameters", &Ensemble::parameters)
      .def_readwrite("fidelity_label", &Ensemble::fidelity_label)
      .def_readwrite("model_id", &Ensemble::model_id)
      .def_property_readonly("rows", &Ensemble::rows)
      .def_property_readonly("cols", &Ensemble::cols)
      .def("validate", &Ensemble::validate)
      .def("__repr__", [](const Ensemble& e) {
        return "<Ensemble " + e.model_id + "/" + e.fidelity_label + " " +
               std::to_string(e.rows()) + "x" + std::to_string(e.cols()) + ">";
      });

  m.def(
      "save_ensemble",
      [](const std::filesystem::path& path, const Ensemble& ensemble,
         std::uint64_t seed, const std::string& config_hash) {
        save_ensemble(path, ensemble, EnsembleFileMeta{seed, config_hash});
      },
      py::arg("path"), py::arg("ensemble"), py::kw_only(), py::arg("seed") = 0,
      py::arg("config_hash") = std::string());
  m.def("load_ensemble", &load_ensemble, py::arg("path"));
  m.def(
      "load_ensemble_meta",
      [](const std::filesystem::path& path) {
        const EnsembleFileMeta meta = load_ensemble_meta(path);
        return py::make_tuple(meta.seed, meta.config_hash);
      },
      py::arg("path"), "Returns (seed, config_hash) from the manifest.");
  m.def("config_hash_hex", &config_hash_hex, py::arg("canonical_config"));

  // --- selectors --------------------------------------------------------

  py::class_<SelectionResult>(m, "SelectionResult")
      .def_property_readonly(
          "indices", [](const SelectionResult& r) { return r.ordered_indices; })
      .def_property_readonly(
          "scores", [](const SelectionResult& r) { return r.step_scores; })
      .def_property_readonly("termination",
                             [](const SelectionResult& r) {
                               return std::string(termination_label(r.termination));
                             })
      .def_property_readonly("coefficients",
                             [](const SelectionResult& r) -> py::object {
                               if (!r.coefficient_matrix) return py::none();
                               return py::cast(*r.coefficient_matrix);
                             })
      .def("__repr__", [](const SelectionResult& r) {
        return "<SelectionResult " + std::to_string(r.ordered_indices.size()) +
               " indices, " + termination_label(r.termination) + ">";
      });

  m.def(
      "select",
      [](const Matrix& ensemble, const std::string& method, Index size,
         std::optional<double> lambda, double epsilon, Index rank,
         std::uint64_t seed, bool normalize) {
        return select(ensemble, make_config(method, size, lambda, epsilon, rank,
                                            seed, normalize));
      },
      py::arg("ensemble"), py::arg("method"), py::arg("size"), py::kw_only(),
      py::arg("lambda_") = py::none(), py::arg("epsilon") = 0.0,
      py::arg("rank") = 0, py::arg("seed") = 0, py::arg("normalize") = false,
      "Pick `size` columns of `ensemble` with rand/lev/qr/chol/lu/gomp.");

  m.def("group_lasso_objective", &group_lasso_objective, py::arg("ensemble"),
        py::arg("b"), py::arg("lambda_"));

  // --- bifidelity surrogate ----------------------------------------------

  py::class_<BifidelityModel>(m, "BifidelityModel")
      .def_readonly("selected_indices", &BifidelityModel::selected_indices)
      .def_readonly("low_basis", &BifidelityModel::low_basis)
      .def_readonly("high_basis", &BifidelityModel::high_basis);

  m.def(
      "fit",
      [](const Ensemble& low, const Ensemble& high, const std::string& method,
         Index size, std::optional<double> lambda, double epsilon, Index rank,
         std::uint64_t seed, bool normalize) {
        const SelectorConfig cfg =
            make_config(method, size, lambda, epsilon, rank, seed, normalize);
        const SelectionResult chosen = select(low.snapshots, cfg);
        return fit(low, high, chosen, cfg);
      },
      py::arg("low"), py::arg("high"), py::arg("method"), py::arg("size"),
      py::kw_only(), py::arg("lambda_") = py::none(), py::arg("epsilon") = 0.0,
      py::arg("rank") = 0, py::arg("seed") = 0, py::arg("normalize") = false,
      "Select on the low-fidelity ensemble and freeze both bases.");

  m.def("coefficients", &coefficients, py::arg("model"), py::arg("low_snapshot"));
  m.def("reconstruct_high", &reconstruct_high, py::arg("model"), py::arg("coeffs"));
  m.def(
      "evaluate_error",
      [](const Matrix& truth, const Matrix& predictions) {
        return evaluate_error(truth, predictions);
      },
      py::arg("truth"), py::arg("predictions"));

  // --- sweep ----------------------------------------------------------------

  py::class_<ErrorRecord>(m, "ErrorRecord")
      .def_readonly("method", &ErrorRecord::method)
      .def_readonly("subset_size", &ErrorRecord::subset_size)
      .def_readonly("low_error", &ErrorRecord::low_error)
      .def_readonly("high_error", &ErrorRecord::high_error)
      .def_property_readonly("seed",
                             [](const ErrorRecord& r) -> py::object {
                               if (!r.seed) return py::none();
                               return py::cast(*r.seed);
                             })
      .def("__repr__", [](const ErrorRecord& r) {
        return "<ErrorRecord " + r.method + " m=" + std::to_string(r.subset_size) + ">";
      });

  py::class_<ErrorReport>(m, "ErrorReport")
      .def_readonly("rows", &ErrorReport::rows)
      .def("to_csv", &ErrorReport::to_csv)
      .def("to_plot_table", &ErrorReport::to_plot_table);

  m.def(
      "sweep",
      [](const Ensemble& low, const Ensemble& high,
         const std::vector<std::string>& methods, const IndexList& sizes,
         Index trials, std::uint64_t seed, bool held_out_only, int workers,
         std::optional<double> lambda, double epsilon, Index rank) {
        std::vector<SelectorConfig> configs;
        configs.reserve(methods.size());
        for (const std::string& name : methods)
          configs.push_back(make_config(name, 1, lambda, epsilon, rank, seed, false));
        SweepOptions opt;
        opt.sizes = sizes;
        opt.random_trials = trials;
        opt.base_seed = seed;
        opt.held_out_only = held_out_only;
        opt.workers = workers;
        return sweep(low, high, configs, opt);
      },
      py::arg("low"), py::arg("high"), py::arg("methods"), py::arg("sizes"),
      py::kw_only(), py::arg("trials") = 100, py::arg("seed") = 0,
      py::arg("held_out_only") = true, py::arg("workers") = 1,
      py::arg("lambda_") = py::none(), py::arg("epsilon") = 0.0,
      py::arg("rank") = 0,
      "Error-vs-size study across methods; scores both fidelities.");

  // --- models -----------------------------------------------------------

  py::class_<BurgersSpec>(m, "BurgersSpec")
      .def(py::init<>())
      .def_readwrite("viscosity", &BurgersSpec::viscosity)
      .def_readwrite("boundary_delta", &BurgersSpec::boundary_delta)
      .def_readwrite("interior_points", &BurgersSpec::interior_points)
      .def_readwrite("tolerance", &BurgersSpec::tolerance)
      .def_readwrite("max_steps", &BurgersSpec::max_steps)
      .def_readwrite("cfl", &BurgersSpec::cfl);

  py::class_<SteadyResult>(m, "SteadyResult")
      .def_readonly("profile", &SteadyResult::profile)
      .def_readonly("converged", &SteadyResult::converged)
      .def_readonly("last_change", &SteadyResult::last_change)
      .def_readonly("steps", &SteadyResult::steps);

  m.def("burgers_steady", &burgers_steady, py::arg("spec"));

  py::class_<PendulumSpec>(m, "PendulumSpec")
      .def(py::init<>())
      .def_readwrite("m2", &PendulumSpec::m2)
      .def_readwrite("l2", &PendulumSpec::l2)
      .def_readwrite("dt", &PendulumSpec::dt)
      .def_readwrite("horizon", &PendulumSpec::horizon);

  py::class_<SeriesResult>(m, "SeriesResult")
      .def_readonly("series", &SeriesResult::series)
      .def_readonly("blew_up", &SeriesResult::blew_up);

  m.def(
      "pendulum_series",
      [](const PendulumSpec& spec, const std::string& fidelity) {
        return pendulum_series(spec, parse_pendulum_fidelity(fidelity));
      },
      py::arg("spec"), py::arg("fidelity"),
      "theta2 samples; fidelity is 'nonlinear' or 'linear'.");

  py::class_<ParameterGrid>(m, "ParameterGrid")
      .def_property_readonly("size", &ParameterGrid::size)
      .def("point", &ParameterGrid::point, py::arg("flat"));

  m.def("burgers_default_grid", &burgers_default_grid,
        py::arg("n_delta") = 20, py::arg("n_nu") = 20);
  m.def("pendulum_default_grid", &pendulum_default_grid,
        py::arg("n_m2") = 20, py::arg("n_l2") = 20);

  m.def(
      "build_burgers_ensemble",
      [](const ParameterGrid& grid, const std::string& fidelity, Index nx_low,
         Index nx_high, double tolerance, long max_steps) {
        BurgersModelOptions opt;
        opt.nx_low = nx_low;
        opt.nx_high = nx_high;
        opt.tolerance = tolerance;
        opt.max_steps = max_steps;
        return build_burgers_ensemble(grid, parse_fidelity(fidelity), opt);
      },
      py::arg("grid"), py::arg("fidelity"), py::kw_only(),
      py::arg("nx_low") = 40, py::arg("nx_high") = 256,
      py::arg("tolerance") = 1e-10, py::arg("max_steps") = 50'000'000);

  m.def(
      "build_pendulum_ensemble",
      [](const ParameterGrid& grid, const std::string& fidelity, double dt_low,
         double dt_high, double horizon) {
        PendulumModelOptions opt;
        opt.dt_low = dt_low;
        opt.dt_high = dt_high;
        opt.horizon = horizon;
        return build_pendulum_ensemble(grid, parse_fidelity(fidelity), opt);
      },
      py::arg("grid"), py::arg("fidelity"), py::kw_only(),
      py::arg("dt_low") = 0.25, py::arg("dt_high") = 0.01,
      py::arg("horizon") = 15.0);

  py::class_<RecoveryInstance>(m, "RecoveryInstance")
      .def_readonly("ensemble", &RecoveryInstance::ensemble)
      .def_readonly("basis_indices", &RecoveryInstance::basis_indices)
      .def_readonly("expansion", &RecoveryInstance::expansion);

  m.def("synthetic_recovery_instance", &synthetic_recovery_instance,
        py::arg("d"), py::arg("basis_size"), py::arg("n"), py::arg("coeff_bound"),
        py::arg("noise_sigma"), py::arg("seed"));

  // --- recovery theory ----------------------------------------------------

  m.def(
      "expansion_matrix",
      [](const Matrix& ensemble, const IndexList& basis) {
        return expansion_matrix(ensemble, basis);
      },
      py::arg("ensemble"), py::arg("basis"));
  m.def("consistency_bound", &consistency_bound, py::arg("expansion"));
  m.def(
      "lambda_min",
      [](const Matrix& ensemble, const IndexList& basis) {
        return lambda_min(ensemble, basis);
      },
      py::arg("ensemble"), py::arg("basis"));

  py::class_<RecoveryDiagnostics>(m, "RecoveryDiagnostics")
      .def_readonly("consistency_bound", &RecoveryDiagnostics::consistency_bound)
      .def_readonly("basis_min_eigenvalue", &RecoveryDiagnostics::basis_min_eigenvalue)
      .def_readonly("epsilon_threshold", &RecoveryDiagnostics::epsilon_threshold)
      .def_readonly("min_row_mass", &RecoveryDiagnostics::min_row_mass)
      .def_readonly("consistency_ok", &RecoveryDiagnostics::consistency_ok)
      .def_readonly("row_mass_ok", &RecoveryDiagnostics::row_mass_ok)
      .def("all_ok", &RecoveryDiagnostics::all_ok)
      .def("to_json", &RecoveryDiagnostics::to_json);

  m.def("noisy_thresholds", &noisy_thresholds, py::arg("expansion"),
        py::arg("sigma"), py::arg("eta"), py::arg("n"), py::arg("dim"),
        py::arg("lambda_"));

  py::class_<CsspOptimum>(m, "CsspOptimum")
      .def_readonly("subset", &CsspOptimum::subset)
      .def_readonly("residual", &CsspOptimum::residual);

  m.def("brute_force_cssp", &brute_force_cssp, py::arg("ensemble"), py::arg("m"));

  // --- linear algebra helpers --------------------------------------------

  m.def(
      "projection_residual",
      [](const Matrix& ensemble, const IndexList& subset) {
        return projection_residual(ensemble, subset);
      },
      py::arg("ensemble"), py::arg("subset"),
      "Squared Frobenius residual after projecting onto the subset columns.");
  m.def("rank_k_error", &rank_k_error, py::arg("ensemble"), py::arg("k"),
        "Best possible squared Frobenius residual at rank k.");
}
