// mfalloc: build snapshot ensembles, pick interpolation columns, and
// check recovery conditions from the command line.
//
// Exit codes: 0 success; 1 verify found unmet conditions; 2 bad input,
// bad data or bad usage; 3 a model solve failed to converge.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "mfalloc/bifidelity.hpp"
#include "mfalloc/ensemble_io.hpp"
#include "mfalloc/models.hpp"
#include "mfalloc/selectors.hpp"
#include "mfalloc/theory.hpp"

using namespace mfalloc;

namespace {

IndexList parse_sizes(const std::string& text) {
  IndexList sizes;
  if (text.find(':') != std::string::npos) {
    Index lo = 0, hi = 0, step = 1;
    char colon = 0;
    std::istringstream is(text);
    if (!(is >> lo >> colon >> hi)) throw std::invalid_argument("bad size range '" + text + "'");
    if (is.peek() == ':') {
      is >> colon >> step;
      if (!is || step < 1) throw std::invalid_argument("bad size step in '" + text + "'");
    }
    for (Index v = lo; v <= hi; v += step) sizes.push_back(v);
  } else {
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ','))
      if (!item.empty()) sizes.push_back(std::stoll(item));
  }
  if (sizes.empty()) throw std::invalid_argument("no subset sizes in '" + text + "'");
  return sizes;
}

IndexList parse_one_based_indices(const std::string& text) {
  IndexList out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ','))
    if (!item.empty()) {
      const Index v = std::stoll(item);
      if (v < 1) throw std::invalid_argument("indices are 1-based; got " + item);
      out.push_back(v - 1);
    }
  if (out.empty()) throw std::invalid_argument("no indices given");
  return out;
}

std::string format_double(double v) {
  char buf[40];
  const auto out = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, out.ptr);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream os(out_path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error(out_path + ": cannot open for writing");
  os << text;
}

struct GenerateArgs {
  std::string model;
  std::string low_path, high_path;
  std::pair<Index, Index> counts{20, 20};
  std::uint64_t seed = 0;
  Index nx_low = 40, nx_high = 256;
  double tolerance = 1e-10;
  long max_steps = 50'000'000;
  double dt_low = 0.25, dt_high = 0.01, horizon = 15.0;
};

int run_generate(const GenerateArgs& a) {
  ParameterGrid grid;
  Ensemble low, high;
  std::ostringstream canon;
  canon << "model=" << a.model << ";counts=" << a.counts.first << 'x'
        << a.counts.second << ";seed=" << a.seed;

  if (a.model == "burgers") {
    grid = burgers_default_grid(a.counts.first, a.counts.second);
    BurgersModelOptions opt;
    opt.nx_low = a.nx_low;
    opt.nx_high = a.nx_high;
    opt.tolerance = a.tolerance;
    opt.max_steps = a.max_steps;
    canon << ";nx_low=" << opt.nx_low << ";nx_high=" << opt.nx_high
          << ";tol=" << opt.tolerance << ";max_steps=" << opt.max_steps;
    low = build_burgers_ensemble(grid, Fidelity::low, opt);
    high = build_burgers_ensemble(grid, Fidelity::high, opt);
  } else if (a.model == "pendulum") {
    grid = pendulum_default_grid(a.counts.first, a.counts.second);
    PendulumModelOptions opt;
    opt.dt_low = a.dt_low;
    opt.dt_high = a.dt_high;
    opt.horizon = a.horizon;
    canon << ";dt_low=" << opt.dt_low << ";dt_high=" << opt.dt_high
          << ";horizon=" << opt.horizon;
    low = build_pendulum_ensemble(grid, Fidelity::low, opt);
    high = build_pendulum_ensemble(grid, Fidelity::high, opt);
  } else {
    throw std::invalid_argument("unknown model '" + a.model +
                                "' (valid: burgers, pendulum)");
  }

  EnsembleFileMeta meta;
  meta.seed = a.seed;
  meta.config_hash = config_hash_hex(canon.str());
  save_ensemble(a.low_path, low, meta);
  save_ensemble(a.high_path, high, meta);
  std::cout << "wrote " << a.low_path << " (" << low.rows() << "x" << low.cols()
            << ") and " << a.high_path << " (" << high.rows() << "x"
            << high.cols() << ")\n";
  return 0;
}

struct SelectArgs {
  std::string file;
  std::string method;
  Index size = 1;
  std::optional<double> lambda{};
  double epsilon = 0.0;
  Index rank = 0;
  std::uint64_t seed = 0;
  bool normalize = false;
  std::string format = "json";
  std::string out;
};

int run_select(const SelectArgs& a) {
  const Ensemble ens = load_ensemble(a.file);
  SelectorConfig cfg;
  cfg.method = parse_method(a.method);
  cfg.target_size = a.size;
  cfg.gomp_lambda = a.lambda;
  cfg.gomp_epsilon = a.epsilon;
  cfg.leverage_rank = a.rank;
  cfg.rng_seed = a.seed;
  cfg.normalize_columns = a.normalize;
  const SelectionResult r = select(ens.snapshots, cfg);

  if (a.format == "json") {
    nlohmann::ordered_json j;
    j["method"] = method_label(cfg.method);
    nlohmann::ordered_json idx = nlohmann::ordered_json::array();
    for (Index i : r.ordered_indices) idx.push_back(i + 1);
    j["indices"] = std::move(idx);
    j["scores"] = r.step_scores;
    j["termination"] = termination_label(r.termination);
    emit(j.dump(), a.out);
  } else if (a.format == "csv") {
    std::string csv = "step,index,score\n";
    for (size_t s = 0; s < r.ordered_indices.size(); ++s)
      csv += std::to_string(s + 1) + ',' + std::to_string(r.ordered_indices[s] + 1) +
             ',' + format_double(r.step_scores[s]) + '\n';
    emit(csv, a.out);
  } else {
    throw std::invalid_argument("unknown format '" + a.format + "' (valid: json, csv)");
  }
  return 0;
}

struct SweepArgs {
  std::string low_path, high_path;
  std::string methods = "gomp,chol,qr,lu,lev,rand";
  std::string sizes;
  Index trials = 100;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string scope = "heldout";
  std::optional<double> lambda{};
  double epsilon = 0.0;
  Index rank = 0;
  std::string out;
  std::string plot;
};

int run_sweep(const SweepArgs& a) {
  const Ensemble low = load_ensemble(a.low_path);
  const Ensemble high = load_ensemble(a.high_path);

  std::vector<SelectorConfig> methods;
  std::istringstream is(a.methods);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    SelectorConfig cfg;
    cfg.method = parse_method(item);
    cfg.gomp_lambda = a.lambda;
    cfg.gomp_epsilon = a.epsilon;
    cfg.leverage_rank = a.rank;
    cfg.rng_seed = a.seed;
    methods.push_back(cfg);
  }

  SweepOptions opt;
  opt.sizes = parse_sizes(a.sizes);
  opt.random_trials = a.trials;
  opt.base_seed = a.seed;
  opt.workers = a.workers;
  if (a.scope == "heldout")
    opt.held_out_only = true;
  else if (a.scope == "all")
    opt.held_out_only = false;
  else
    throw std::invalid_argument("unknown scope '" + a.scope + "' (valid: heldout, all)");

  const ErrorReport report = sweep(low, high, methods, opt);
  emit(report.to_csv(), a.out);
  if (!a.plot.empty()) emit(report.to_plot_table(), a.plot);
  return 0;
}

struct VerifyArgs {
  std::string file;
  std::string indices;
  double sigma = 0.0;
  double eta = 0.1;
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  const Ensemble ens = load_ensemble(a.file);
  const IndexList basis = parse_one_based_indices(a.indices);
  const Matrix d = expansion_matrix(ens.snapshots, basis);
  const double lambda = lambda_min(ens.snapshots, basis);
  const RecoveryDiagnostics diag =
      noisy_thresholds(d, a.sigma, a.eta, ens.cols(), ens.rows(), lambda);
  emit(diag.to_json(), a.out);
  return diag.all_ok() ? 0 : 1;
}

struct OracleArgs {
  std::string file;
  Index size = 1;
  std::string format = "json";
  std::string out;
};

int run_oracle(const OracleArgs& a) {
  const Ensemble ens = load_ensemble(a.file);
  const CsspOptimum best = brute_force_cssp(ens.snapshots, a.size);
  if (a.format == "json") {
    nlohmann::ordered_json j;
    nlohmann::ordered_json idx = nlohmann::ordered_json::array();
    for (Index i : best.subset) idx.push_back(i + 1);
    j["indices"] = std::move(idx);
    j["residual"] = best.residual;
    emit(j.dump(), a.out);
  } else if (a.format == "csv") {
    std::string csv = "position,index,residual\n";
    for (size_t s = 0; s < best.subset.size(); ++s)
      csv += std::to_string(s + 1) + ',' + std::to_string(best.subset[s] + 1) + ',' +
             format_double(best.residual) + '\n';
    emit(csv, a.out);
  } else {
    throw std::invalid_argument("unknown format '" + a.format + "' (valid: json, csv)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multifidelity simulation allocation toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("generate", "build and save a low/high ensemble pair");
  cmd_gen->add_option("--model", gen.model, "model id: burgers or pendulum")->required();
  cmd_gen->add_option("--low", gen.low_path, "output path for the low-fidelity file")->required();
  cmd_gen->add_option("--high", gen.high_path, "output path for the high-fidelity file")->required();
  cmd_gen->add_option("--counts", gen.counts, "grid counts per axis (default 20 20)");
  cmd_gen->add_option("--seed", gen.seed, "seed recorded in the manifest");
  cmd_gen->add_option("--nx-low", gen.nx_low, "burgers: low-fidelity interior points");
  cmd_gen->add_option("--nx-high", gen.nx_high, "burgers: high-fidelity interior points");
  cmd_gen->add_option("--tol", gen.tolerance, "burgers: steady-state tolerance");
  cmd_gen->add_option("--max-steps", gen.max_steps, "burgers: pseudo-time step budget");
  cmd_gen->add_option("--dt-low", gen.dt_low, "pendulum: low-fidelity time step");
  cmd_gen->add_option("--dt-high", gen.dt_high, "pendulum: high-fidelity time step");
  cmd_gen->add_option("--horizon", gen.horizon, "pendulum: trajectory length");

  SelectArgs sel;
  CLI::App* cmd_sel = app.add_subcommand("select", "run one column selector on an ensemble file");
  cmd_sel->add_option("file", sel.file, "ensemble file")->required();
  cmd_sel->add_option("--method", sel.method, "rand, lev, qr, chol, lu or gomp")->required();
  cmd_sel->add_option("--size", sel.size, "subset size m")->required();
  double sel_lambda = 0.0;
  CLI::Option* sel_lambda_opt =
      cmd_sel->add_option("--lambda", sel_lambda, "gomp stopping weight (default unbounded)");
  cmd_sel->add_option("--epsilon", sel.epsilon, "gomp correlation stop threshold");
  cmd_sel->add_option("--rank", sel.rank, "leverage rank (0 = min of size and shape)");
  cmd_sel->add_option("--seed", sel.seed, "seed for the random method");
  cmd_sel->add_flag("--normalize", sel.normalize, "normalize columns before selecting");
  cmd_sel->add_option("--format", sel.format, "json or csv (default json)");
  cmd_sel->add_option("--out", sel.out, "write output here instead of stdout");

  SweepArgs swp;
  CLI::App* cmd_swp = app.add_subcommand("sweep", "error-vs-size study; writes a CSV report");
  cmd_swp->add_option("low", swp.low_path, "low-fidelity ensemble file")->required();
  cmd_swp->add_option("high", swp.high_path, "high-fidelity ensemble file")->required();
  cmd_swp->add_option("--methods", swp.methods, "comma list (default all six)");
  cmd_swp->add_option("--sizes", swp.sizes, "subset sizes: 1,2,5 or lo:hi or lo:hi:step")->required();
  cmd_swp->add_option("--trials", swp.trials, "random-method trials per size (default 100)");
  cmd_swp->add_option("--seed", swp.seed, "base seed for random trials");
  cmd_swp->add_option("--workers", swp.workers, "evaluation worker threads (default 1)");
  cmd_swp->add_option("--scope", swp.scope, "score heldout (default) or all columns");
  double swp_lambda = 0.0;
  CLI::Option* swp_lambda_opt =
      cmd_swp->add_option("--lambda", swp_lambda, "gomp stopping weight (default unbounded)");
  cmd_swp->add_option("--epsilon", swp.epsilon, "gomp correlation stop threshold");
  cmd_swp->add_option("--rank", swp.rank, "leverage rank (0 = min of size and shape)");
  cmd_swp->add_option("--out", swp.out, "CSV output path (default stdout)");
  cmd_swp->add_option("--plot", swp.plot, "also write a gnuplot-ready table here");

  VerifyArgs ver;
  CLI::App* cmd_ver = app.add_subcommand("verify", "check recovery conditions for a basis");
  cmd_ver->add_option("file", ver.file, "ensemble file")->required();
  cmd_ver->add_option("--indices", ver.indices, "1-based basis columns, comma separated")->required();
  cmd_ver->add_option("--sigma", ver.sigma, "noise level (default 0)");
  cmd_ver->add_option("--eta", ver.eta, "confidence parameter (default 0.1)");
  cmd_ver->add_option("--out", ver.out, "write the JSON report here instead of stdout");

  OracleArgs ora;
  CLI::App* cmd_ora = app.add_subcommand("oracle", "exhaustive best subset (small files only)");
  cmd_ora->add_option("file", ora.file, "ensemble file")->required();
  cmd_ora->add_option("--size", ora.size, "subset size m")->required();
  cmd_ora->add_option("--format", ora.format, "json or csv (default json)");
  cmd_ora->add_option("--out", ora.out, "write output here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sel_lambda_opt->count() > 0) sel.lambda = sel_lambda;
  if (swp_lambda_opt->count() > 0) swp.lambda = swp_lambda;

  try {
    if (app.got_subcommand(cmd_gen)) return run_generate(gen);
    if (app.got_subcommand(cmd_sel)) return run_select(sel);
    if (app.got_subcommand(cmd_swp)) return run_sweep(swp);
    if (app.got_subcommand(cmd_ver)) return run_verify(ver);
    if (app.got_subcommand(cmd_ora)) return run_oracle(ora);
  } catch (const SolveFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
