#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qgfem/common.hpp"
#include "qgfem/experiment.hpp"

namespace {

using qg::ConfigError;

std::vector<double> parse_doubles(const std::string& text,
                                  const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (double v : parse_doubles(text, what)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError(what + ": expected integers");
    out.push_back(i);
  }
  return out;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw ConfigError(what + ": expected a boolean, got '" + text + "'");
}

// Everything a config file or a flag may set. Flags win over file values,
// file values win over the scenario defaults.
struct Settings {
  std::optional<double> nu, mu, dt, t_end, newton_tol, newton_abs_tol;
  std::optional<int> nx, ny, threads, newton_max_iter;
  std::optional<std::vector<int>> levels;
  std::optional<std::vector<double>> dt_levels, nu_sweep, mu_sweep,
      snapshot_times;
  std::optional<bool> time_study;
  std::optional<std::string> forcing, initial, linear_solver, out;
  std::optional<unsigned long> seed;
  std::optional<double> steady_tol, steady_window, decay_window;

  void merge_from(const Settings& weaker) {
    const auto keep = [](auto& mine, const auto& theirs) {
      if (!mine) mine = theirs;
    };
    keep(nu, weaker.nu);
    keep(mu, weaker.mu);
    keep(dt, weaker.dt);
    keep(t_end, weaker.t_end);
    keep(newton_tol, weaker.newton_tol);
    keep(newton_abs_tol, weaker.newton_abs_tol);
    keep(nx, weaker.nx);
    keep(ny, weaker.ny);
    keep(threads, weaker.threads);
    keep(newton_max_iter, weaker.newton_max_iter);
    keep(levels, weaker.levels);
    keep(dt_levels, weaker.dt_levels);
    keep(nu_sweep, weaker.nu_sweep);
    keep(mu_sweep, weaker.mu_sweep);
    keep(snapshot_times, weaker.snapshot_times);
    keep(time_study, weaker.time_study);
    keep(forcing, weaker.forcing);
    keep(initial, weaker.initial);
    keep(linear_solver, weaker.linear_solver);
    keep(out, weaker.out);
    keep(seed, weaker.seed);
    keep(steady_tol, weaker.steady_tol);
    keep(steady_window, weaker.steady_window);
    keep(decay_window, weaker.decay_window);
  }
};

Settings settings_from_file(const std::string& path) {
  Settings s;
  for (const auto& [key, value] : qg::read_key_value_file(path)) {
    const std::string where = "config key " + key;
    if (key == "nu") s.nu = parse_doubles(value, where)[0];
    else if (key == "mu") s.mu = parse_doubles(value, where)[0];
    else if (key == "dt") s.dt = parse_doubles(value, where)[0];
    else if (key == "t_end") s.t_end = parse_doubles(value, where)[0];
    else if (key == "newton_tol") s.newton_tol = parse_doubles(value, where)[0];
    else if (key == "newton_abs_tol") s.newton_abs_tol = parse_doubles(value, where)[0];
    else if (key == "newton_max_iter") s.newton_max_iter = parse_ints(value, where)[0];
    else if (key == "nx") s.nx = parse_ints(value, where)[0];
    else if (key == "ny") s.ny = parse_ints(value, where)[0];
    else if (key == "threads") s.threads = parse_ints(value, where)[0];
    else if (key == "levels") s.levels = parse_ints(value, where);
    else if (key == "dt_levels") s.dt_levels = parse_doubles(value, where);
    else if (key == "nu_sweep") s.nu_sweep = parse_doubles(value, where);
    else if (key == "mu_sweep") s.mu_sweep = parse_doubles(value, where);
    else if (key == "snapshot_times") s.snapshot_times = parse_doubles(value, where);
    else if (key == "time_study") s.time_study = parse_bool(value, where);
    else if (key == "forcing") s.forcing = value;
    else if (key == "initial") s.initial = value;
    else if (key == "linear_solver") s.linear_solver = value;
    else if (key == "out") s.out = value;
    else if (key == "seed") s.seed = static_cast<unsigned long>(parse_ints(value, where)[0]);
    else if (key == "steady_tol") s.steady_tol = parse_doubles(value, where)[0];
    else if (key == "steady_window") s.steady_window = parse_doubles(value, where)[0];
    else if (key == "decay_window") s.decay_window = parse_doubles(value, where)[0];
    else throw ConfigError("unknown config key '" + key + "' in " + path);
  }
  return s;
}

qg::ForcingKind forcing_from_name(const std::string& name) {
  if (name == "zero") return qg::ForcingKind::Zero;
  if (name == "siny") return qg::ForcingKind::SinPiY;
  if (name == "manufactured") return qg::ForcingKind::Manufactured;
  throw ConfigError("unknown forcing '" + name +
                    "' (expected zero, siny, or manufactured)");
}

qg::InitialKind initial_from_name(const std::string& name) {
  if (name == "zero") return qg::InitialKind::Zero;
  if (name == "sinsq") return qg::InitialKind::SinSqProduct;
  throw ConfigError("unknown initial '" + name + "' (expected zero or sinsq)");
}

qg::LinearSolverKind solver_from_name(const std::string& name) {
  if (name == "lu") return qg::LinearSolverKind::DirectLU;
  if (name == "bicgstab") return qg::LinearSolverKind::BicgstabIlu;
  throw ConfigError("unknown linear solver '" + name +
                    "' (expected lu or bicgstab)");
}

qg::ExperimentConfig resolve(const std::string& scenario_name,
                             const Settings& s) {
  qg::Overrides o;
  o.nu = s.nu;
  o.mu = s.mu;
  o.dt = s.dt;
  o.t_end = s.t_end;
  o.newton_tol = s.newton_tol;
  o.newton_abs_tol = s.newton_abs_tol;
  o.nx = s.nx;
  o.ny = s.ny;
  o.threads = s.threads;

  qg::ExperimentConfig cfg;
  cfg.setup = qg::scenario(scenario_name, o);
  if (s.newton_max_iter) {
    if (*s.newton_max_iter < 1)
      throw ConfigError("newton_max_iter must be at least 1");
    cfg.setup.solver.newton_max_iter = *s.newton_max_iter;
  }
  if (s.levels) cfg.setup.levels = *s.levels;
  if (s.dt_levels) cfg.setup.dt_levels = *s.dt_levels;
  if (s.nu_sweep) cfg.setup.nu_sweep = *s.nu_sweep;
  if (s.mu_sweep) cfg.setup.mu_sweep = *s.mu_sweep;
  if (s.snapshot_times) cfg.setup.snapshot_times = *s.snapshot_times;
  if (s.time_study) cfg.time_study = *s.time_study;
  if (s.forcing) cfg.setup.problem.forcing = forcing_from_name(*s.forcing);
  if (s.initial) cfg.setup.problem.initial = initial_from_name(*s.initial);
  if (s.linear_solver)
    cfg.setup.solver.linear_solver = solver_from_name(*s.linear_solver);
  if (s.seed) cfg.seed = *s.seed;
  if (s.steady_tol) {
    if (*s.steady_tol <= 0.0) throw ConfigError("steady_tol must be positive");
    cfg.steady_tol = *s.steady_tol;
  }
  if (s.steady_window) cfg.steady_window = *s.steady_window;
  if (s.decay_window) cfg.decay_window = *s.decay_window;

  // A pinned nu or mu turns a sweep scenario into a single-member run,
  // unless the sweep itself was given explicitly.
  if (s.nu && !s.nu_sweep) cfg.setup.nu_sweep = {*s.nu};
  if (s.mu && !s.mu_sweep && scenario_name == "decay")
    cfg.setup.mu_sweep = {*s.mu};

  if (s.out) {
    cfg.out_dir = *s.out;
  } else {
    const char* root = std::getenv("QGFEM_OUT_ROOT");
    cfg.out_dir = (root ? std::string(root) : std::string("./out")) + "/" +
                  scenario_name;
  }

  // Error measurement only makes sense when the run actually tracks the
  // manufactured field, which starts from zero on the unit square.
  cfg.setup.problem.has_exact =
      cfg.setup.problem.forcing == qg::ForcingKind::Manufactured &&
      cfg.setup.problem.initial == qg::InitialKind::Zero;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stream-function solver for the single-layer quasi-geostrophic "
               "equation (C1 bicubic Hermite elements, backward Euler)"};
  app.require_subcommand(1);

  Settings flags;
  std::string config_path;
  std::string levels_text, dt_levels_text, snapshot_text, nu_sweep_text,
      mu_sweep_text, forcing_text, initial_text;
  bool time_study_flag = false;

  const auto add_shared = [&](CLI::App* sub) {
    sub->add_option("--nu", flags.nu, "viscosity coefficient");
    sub->add_option("--mu", flags.mu, "inverse Rossby number");
    sub->add_option("--nx", flags.nx, "cells in x");
    sub->add_option("--ny", flags.ny, "cells in y");
    sub->add_option("--dt", flags.dt, "time step");
    sub->add_option("--t-end", flags.t_end, "final time");
    sub->add_option("--newton-tol", flags.newton_tol,
                    "relative Newton tolerance");
    sub->add_option("--newton-abs-tol", flags.newton_abs_tol,
                    "absolute Newton residual floor");
    sub->add_option("--threads", flags.threads, "assembly threads");
    sub->add_option("--linear-solver", flags.linear_solver, "lu or bicgstab");
    sub->add_option("--seed", flags.seed, "seed recorded in the manifest");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--config", config_path, "key = value settings file");
  };

  CLI::App* conv = app.add_subcommand(
      "convergence", "manufactured-solution order-of-convergence study");
  add_shared(conv);
  conv->add_option("--levels", levels_text, "comma-separated mesh sizes");
  conv->add_option("--dt-levels", dt_levels_text,
                   "comma-separated step sizes for the time study");
  conv->add_flag("--time-study", time_study_flag,
                 "vary dt on a fixed mesh instead of h");

  CLI::App* decay =
      app.add_subcommand("decay", "free-decay energy sweep over nu and mu");
  add_shared(decay);
  decay->add_option("--nu-sweep", nu_sweep_text, "comma-separated nu values");
  decay->add_option("--mu-sweep", mu_sweep_text, "comma-separated mu values");

  CLI::App* attractor = app.add_subcommand(
      "attractor", "wind-forced long runs with field snapshots");
  add_shared(attractor);
  attractor->add_option("--nu-sweep", nu_sweep_text,
                        "comma-separated nu values");
  attractor->add_option("--snapshot-times", snapshot_text,
                        "comma-separated snapshot times");

  CLI::App* custom = app.add_subcommand(
      "custom", "single run with explicit forcing and initial data");
  add_shared(custom);
  custom->add_option("--forcing", forcing_text, "zero, siny, or manufactured");
  custom->add_option("--initial", initial_text, "zero or sinsq");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (!levels_text.empty()) flags.levels = parse_ints(levels_text, "--levels");
    if (!dt_levels_text.empty())
      flags.dt_levels = parse_doubles(dt_levels_text, "--dt-levels");
    if (!nu_sweep_text.empty())
      flags.nu_sweep = parse_doubles(nu_sweep_text, "--nu-sweep");
    if (!mu_sweep_text.empty())
      flags.mu_sweep = parse_doubles(mu_sweep_text, "--mu-sweep");
    if (!snapshot_text.empty())
      flags.snapshot_times = parse_doubles(snapshot_text, "--snapshot-times");
    if (!forcing_text.empty()) flags.forcing = forcing_text;
    if (!initial_text.empty()) flags.initial = initial_text;
    if (time_study_flag) flags.time_study = true;

    if (!config_path.empty()) flags.merge_from(settings_from_file(config_path));

    const std::string name = app.get_subcommands().front()->get_name();
    const qg::ExperimentConfig cfg = resolve(name, flags);

    if (name == "convergence") return qg::cmd_convergence(cfg);
    if (name == "decay") return qg::cmd_decay(cfg);
    if (name == "attractor") return qg::cmd_attractor(cfg);
    return qg::cmd_custom(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const qg::SolveError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return qg::kExitSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
