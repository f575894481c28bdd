#include "qgfem/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "qgfem/common.hpp"

namespace qg {

namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

namespace {

std::string join(const std::vector<double>& vals) {
  std::string out;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i) out += ",";
    out += fmtg(vals[i]);
  }
  return out;
}

std::string join(const std::vector<int>& vals) {
  std::string out;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(vals[i]);
  }
  return out;
}

const char* forcing_name(ForcingKind k) {
  switch (k) {
    case ForcingKind::Zero: return "zero";
    case ForcingKind::SinPiY: return "siny";
    case ForcingKind::Manufactured: return "manufactured";
  }
  return "zero";
}

const char* initial_name(InitialKind k) {
  return k == InitialKind::SinSqProduct ? "sinsq" : "zero";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  return out;
}

// Steps and step times of a run, mirroring TimeStepper::run.
std::vector<double> step_times(double t_end, double dt) {
  int n_full = static_cast<int>(std::floor(t_end / dt * (1.0 + 1e-12)));
  double rem = t_end - n_full * dt;
  if (rem <= 1e-9 * dt) rem = 0.0;
  std::vector<double> times(1, 0.0);
  for (int n = 1; n <= n_full; ++n) times.push_back(n * dt);
  if (rem > 0.0) times.push_back(t_end);
  return times;
}

}  // namespace

RunResult run_problem(const ScenarioSetup& setup, const SnapshotSink& sink) {
  const ProblemSpec& p = setup.problem;
  const RectMesh mesh = build_mesh(p.x0, p.x1, p.y0, p.y1, setup.nx, setup.ny);
  const DofMap dofmap = build_dofmap(mesh);
  Assembler assembler(mesh, dofmap, setup.solver.threads);
  TimeStepper stepper(std::move(assembler), {p.nu, p.mu}, setup.solver);

  const auto psi0 = make_initial(p);
  State state = initial_state(*psi0, mesh, dofmap);

  TimeStepper::LoadFn load_at;
  const ForcingFn forcing = make_forcing(p);
  Eigen::VectorXd cached_load;
  if (forcing) {
    if (p.forcing == ForcingKind::Manufactured) {
      const TimeStepper& ts = stepper;
      const double mu = p.mu;
      load_at = [&ts, forcing, mu](double t) {
        return ts.assembler().load(forcing, t, mu);
      };
    } else {
      cached_load = stepper.assembler().load(forcing, 0.0, p.mu);
      load_at = [&cached_load](double) { return cached_load; };
    }
  }

  RunResult result;
  std::vector<TimeStepper::Observer> observers;
  const TimeStepper& ts = stepper;
  observers.push_back([&result, &ts](int, double t, const State& s) {
    result.energy.t.push_back(t);
    result.energy.grad_norm.push_back(std::sqrt(ts.assembler().quad_gradgrad(s.coeffs)));
    result.energy.delta_norm.push_back(std::sqrt(ts.assembler().quad_biharmonic(s.coeffs)));
  });

  // Map each snapshot time to the nearest step index.
  std::map<int, double> snap_at;
  if (sink && !setup.snapshot_times.empty()) {
    const auto times = step_times(setup.solver.t_end, setup.solver.dt);
    for (double target : setup.snapshot_times) {
      if (target < -1e-12 || target > setup.solver.t_end * (1.0 + 1e-12))
        continue;
      int best = 0;
      for (std::size_t n = 1; n < times.size(); ++n)
        if (std::abs(times[n] - target) < std::abs(times[best] - target))
          best = static_cast<int>(n);
      snap_at[best] = target;
    }
    observers.push_back(
        [&snap_at, &mesh, &dofmap, &sink](int step, double t, const State& s) {
          auto it = snap_at.find(step);
          if (it != snap_at.end()) sink(t, mesh, dofmap, s);
        });
  }

  result.summary = stepper.run(state, setup.solver.t_end, load_at, observers);
  result.final_state = std::move(state);
  return result;
}

LevelError run_spatial_level(const ScenarioSetup& setup, int level) {
  ScenarioSetup s = setup;
  s.nx = s.ny = level;
  const RunResult res = run_problem(s);
  const RectMesh mesh =
      build_mesh(s.problem.x0, s.problem.x1, s.problem.y0, s.problem.y1, s.nx, s.ny);
  const DofMap dofmap = build_dofmap(mesh);
  const ManufacturedSolution exact;
  LevelError out;
  out.h = (s.problem.x1 - s.problem.x0) / level;
  out.error = error_norms(mesh, dofmap, res.final_state.coeffs, exact,
                          res.final_state.t);
  return out;
}

LevelError run_temporal_level(const ScenarioSetup& setup, double dt) {
  ScenarioSetup s = setup;
  s.solver.dt = dt;
  const RunResult res = run_problem(s);
  const RectMesh mesh =
      build_mesh(s.problem.x0, s.problem.x1, s.problem.y0, s.problem.y1, s.nx, s.ny);
  const DofMap dofmap = build_dofmap(mesh);
  const ManufacturedSolution exact;
  LevelError out;
  out.h = dt;
  out.error = error_norms(mesh, dofmap, res.final_state.coeffs, exact,
                          res.final_state.t);
  return out;
}

std::map<std::string, std::string> read_key_value_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config file " + path + " line " +
                        std::to_string(lineno) + ": expected key = value");
    const std::string key = strip(stripped.substr(0, eq));
    const std::string value = strip(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config file " + path + " line " +
                        std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

void write_manifest(const ExperimentConfig& cfg) {
  const ScenarioSetup& s = cfg.setup;
  fs::create_directories(cfg.out_dir);
  auto out = open_out(fs::path(cfg.out_dir) / "manifest.txt");
  out << "version = " << kVersion << "\n"
      << "scenario = " << s.name << "\n"
      << "domain = " << fmtg(s.problem.x0) << "," << fmtg(s.problem.x1) << ","
      << fmtg(s.problem.y0) << "," << fmtg(s.problem.y1) << "\n"
      << "nu = " << fmt17(s.problem.nu) << "\n"
      << "mu = " << fmt17(s.problem.mu) << "\n"
      << "forcing = " << forcing_name(s.problem.forcing) << "\n"
      << "initial = " << initial_name(s.problem.initial) << "\n"
      << "nx = " << s.nx << "\n"
      << "ny = " << s.ny << "\n"
      << "dt = " << fmt17(s.solver.dt) << "\n"
      << "t_end = " << fmt17(s.solver.t_end) << "\n"
      << "newton_tol = " << fmtg(s.solver.newton_tol) << "\n"
      << "newton_abs_tol = " << fmtg(s.solver.newton_abs_tol) << "\n"
      << "newton_max_iter = " << s.solver.newton_max_iter << "\n"
      << "linear_solver = "
      << (s.solver.linear_solver == LinearSolverKind::DirectLU ? "lu"
                                                               : "bicgstab")
      << "\n"
      << "threads = " << s.solver.threads << "\n"
      << "levels = " << join(s.levels) << "\n"
      << "dt_levels = " << join(s.dt_levels) << "\n"
      << "nu_sweep = " << join(s.nu_sweep) << "\n"
      << "mu_sweep = " << join(s.mu_sweep) << "\n"
      << "snapshot_times = " << join(s.snapshot_times) << "\n"
      << "time_study = " << (cfg.time_study ? 1 : 0) << "\n"
      << "band_l2 = " << fmtg(cfg.bands.l2) << "\n"
      << "band_h1 = " << fmtg(cfg.bands.h1) << "\n"
      << "band_h2 = " << fmtg(cfg.bands.h2) << "\n"
      << "band_tol = " << fmtg(cfg.bands.tol) << "\n"
      << "band_dt = " << fmtg(cfg.bands.dt_order) << "\n"
      << "band_dt_tol = " << fmtg(cfg.bands.dt_tol) << "\n"
      << "steady_tol = " << fmtg(cfg.steady_tol) << "\n"
      << "steady_window = " << fmtg(cfg.steady_window) << "\n"
      << "decay_window = " << fmtg(cfg.decay_window) << "\n"
      << "seed = " << cfg.seed << "\n"
      << "out = " << cfg.out_dir << "\n";
}

void write_snapshot_vtk(const fs::path& path, const RectMesh& mesh,
                        const DofMap& dofmap, const Eigen::VectorXd& coeffs,
                        const std::string& title) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n"
      << title << "\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << mesh.nx + 1 << " " << mesh.ny + 1 << " 1\n"
      << "ORIGIN " << fmt17(mesh.x0) << " " << fmt17(mesh.y0) << " 0\n"
      << "SPACING " << fmt17(mesh.hx) << " " << fmt17(mesh.hy) << " 1\n"
      << "POINT_DATA " << mesh.node_count() << "\n"
      << "SCALARS psi double 1\n"
      << "LOOKUP_TABLE default\n";
  for (int j = 0; j <= mesh.ny; ++j)
    for (int i = 0; i <= mesh.nx; ++i) {
      const int g = dofmap(mesh.node_id(i, j), 0);
      out << fmt17(g >= 0 ? coeffs[g] : 0.0) << "\n";
    }
}

void write_snapshot_csv(const fs::path& path, const RectMesh& mesh,
                        const DofMap& dofmap, const Eigen::VectorXd& coeffs) {
  auto out = open_out(path);
  out << "x,y,psi,psi_x,psi_y\n";
  for (int j = 0; j <= mesh.ny; ++j)
    for (int i = 0; i <= mesh.nx; ++i) {
      const int node = mesh.node_id(i, j);
      const auto dof = [&](int comp) {
        const int g = dofmap(node, comp);
        return g >= 0 ? coeffs[g] : 0.0;
      };
      out << fmt17(mesh.node_x(i)) << "," << fmt17(mesh.node_y(j)) << ","
          << fmt17(dof(0)) << "," << fmt17(dof(1)) << "," << fmt17(dof(2))
          << "\n";
    }
}

void write_energy_csv(const fs::path& path, const EnergyHistory& energy) {
  auto out = open_out(path);
  out << "t,grad_norm,delta_norm\n";
  for (std::size_t i = 0; i < energy.t.size(); ++i)
    out << fmt17(energy.t[i]) << "," << fmt17(energy.grad_norm[i]) << ","
        << fmt17(energy.delta_norm[i]) << "\n";
}

namespace {

void require_halving_levels(const std::vector<int>& levels) {
  if (levels.empty())
    throw ConfigError("convergence: the level list is empty");
  for (std::size_t r = 0; r < levels.size(); ++r) {
    if (levels[r] < 2 || (levels[r] & (levels[r] - 1)) != 0)
      throw ConfigError("convergence: levels must be powers of two, got " +
                        std::to_string(levels[r]));
    if (r && levels[r] != 2 * levels[r - 1])
      throw ConfigError("convergence: levels must double at every entry");
  }
}

void require_halving_dts(const std::vector<double>& dts) {
  if (dts.empty())
    throw ConfigError("convergence: the dt level list is empty");
  for (std::size_t r = 1; r < dts.size(); ++r)
    if (std::abs(dts[r - 1] / dts[r] - 2.0) > 1e-9)
      throw ConfigError("convergence: dt levels must halve at every entry");
}

bool in_band(double value, double center, double tol) {
  return value >= center - tol && value <= center + tol;
}

void write_eoc_csv(const fs::path& path, const std::string& first_col,
                   const std::vector<LevelError>& rows, const EocResult& rates) {
  auto out = open_out(path);
  out << first_col << ",e_l2,e_h1,e_h2,eoc_l2,eoc_h1,eoc_h2\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << fmt17(rows[r].h) << "," << fmt17(rows[r].error.l2) << ","
        << fmt17(rows[r].error.h1_semi) << "," << fmt17(rows[r].error.h2_broken);
    if (r == 0) {
      out << ",,,\n";
    } else {
      out << "," << fmt17(rates.l2[r - 1]) << "," << fmt17(rates.h1[r - 1])
          << "," << fmt17(rates.h2[r - 1]) << "\n";
    }
  }
}

std::string member_tag(double nu) { return "nu" + std::string(fmtg(nu)); }
std::string member_tag(double nu, double mu) {
  return member_tag(nu) + "_mu" + fmtg(mu);
}

}  // namespace

int cmd_convergence(const ExperimentConfig& cfg) {
  write_manifest(cfg);
  const fs::path dir(cfg.out_dir);
  try {
    std::vector<LevelError> rows;
    if (!cfg.time_study) {
      require_halving_levels(cfg.setup.levels);
      for (int level : cfg.setup.levels)
        rows.push_back(run_spatial_level(cfg.setup, level));
    } else {
      require_halving_dts(cfg.setup.dt_levels);
      for (double dt : cfg.setup.dt_levels)
        rows.push_back(run_temporal_level(cfg.setup, dt));
    }

    EocResult rates;
    if (rows.size() > 1) {
      EocTable table;
      for (const auto& row : rows) {
        table.h.push_back(row.h);
        table.error.push_back(row.error);
      }
      rates = eoc(table);
    }
    write_eoc_csv(dir / "eoc.csv", cfg.time_study ? "dt" : "h", rows, rates);

    if (rows.size() < 2) return kExitOk;
    bool pass = true;
    if (cfg.time_study) {
      pass = in_band(rates.h1.back(), cfg.bands.dt_order, cfg.bands.dt_tol);
    } else {
      pass = in_band(rates.l2.back(), cfg.bands.l2, cfg.bands.tol) &&
             in_band(rates.h1.back(), cfg.bands.h1, cfg.bands.tol) &&
             in_band(rates.h2.back(), cfg.bands.h2, cfg.bands.tol);
    }
    return pass ? kExitOk : kExitBandViolation;
  } catch (const SolveError& e) {
    std::cerr << "convergence: solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

int cmd_decay(const ExperimentConfig& cfg) {
  write_manifest(cfg);
  const fs::path dir(cfg.out_dir);
  const std::vector<double> nus = cfg.setup.nu_sweep.empty()
                                      ? std::vector<double>{cfg.setup.problem.nu}
                                      : cfg.setup.nu_sweep;
  const std::vector<double> mus = cfg.setup.mu_sweep.empty()
                                      ? std::vector<double>{cfg.setup.problem.mu}
                                      : cfg.setup.mu_sweep;

  struct Row {
    double nu, mu, rate, r2;
    bool ok;
  };
  std::vector<Row> rows;
  bool any_failed = false;
  for (double nu : nus)
    for (double mu : mus) {
      ScenarioSetup member = cfg.setup;
      member.problem.nu = nu;
      member.problem.mu = mu;
      try {
        const RunResult res = run_problem(member);
        write_energy_csv(dir / ("energy_" + member_tag(nu, mu) + ".csv"),
                         res.energy);
        const FitResult fit =
            decay_rate(res.energy.t, res.energy.grad_norm, cfg.decay_window);
        rows.push_back({nu, mu, fit.rate, fit.r2, true});
      } catch (const SolveError& e) {
        std::cerr << "decay: member nu=" << fmtg(nu) << " mu=" << fmtg(mu)
                  << " failed: " << e.what() << "\n";
        rows.push_back({nu, mu, 0.0, 0.0, false});
        any_failed = true;
      }
    }

  auto out = open_out(dir / "decay_rates.csv");
  out << "nu,mu,rate,r2,status\n";
  for (const auto& row : rows)
    out << fmt17(row.nu) << "," << fmt17(row.mu) << "," << fmt17(row.rate)
        << "," << fmt17(row.r2) << "," << (row.ok ? "ok" : "failed") << "\n";
  return any_failed ? kExitSolverFailure : kExitOk;
}

int cmd_attractor(const ExperimentConfig& cfg) {
  write_manifest(cfg);
  const fs::path dir(cfg.out_dir);
  const std::vector<double> nus = cfg.setup.nu_sweep.empty()
                                      ? std::vector<double>{cfg.setup.problem.nu}
                                      : cfg.setup.nu_sweep;

  struct Row {
    double nu;
    bool steady, ok;
    int window;
  };
  std::vector<Row> rows;
  bool any_failed = false;
  for (double nu : nus) {
    ScenarioSetup member = cfg.setup;
    member.problem.nu = nu;
    const std::string tag = member_tag(nu);
    const SnapshotSink sink = [&](double t, const RectMesh& mesh,
                                  const DofMap& dofmap, const State& s) {
      const std::string stem = "snapshot_" + tag + "_t" + fmtg(t);
      write_snapshot_vtk(dir / (stem + ".vtk"), mesh, dofmap, s.coeffs,
                         "stream function at t=" + fmtg(t));
      write_snapshot_csv(dir / (stem + ".csv"), mesh, dofmap, s.coeffs);
    };
    try {
      const RunResult res = run_problem(member, sink);
      write_energy_csv(dir / ("energy_" + tag + ".csv"), res.energy);
      const int n = static_cast<int>(res.energy.grad_norm.size());
      const int window = std::max(
          2, static_cast<int>(std::ceil(n * cfg.steady_window)));
      const bool steady =
          steady_state(res.energy.grad_norm, window, cfg.steady_tol);
      rows.push_back({nu, steady, true, window});
    } catch (const SolveError& e) {
      std::cerr << "attractor: member nu=" << fmtg(nu) << " failed: "
                << e.what() << "\n";
      rows.push_back({nu, false, false, 0});
      any_failed = true;
    }
  }

  auto out = open_out(dir / "steady.csv");
  out << "nu,steady,tol,window,status\n";
  for (const auto& row : rows)
    out << fmt17(row.nu) << "," << (row.steady ? 1 : 0) << ","
        << fmtg(cfg.steady_tol) << "," << row.window << ","
        << (row.ok ? "ok" : "failed") << "\n";
  return any_failed ? kExitSolverFailure : kExitOk;
}

int cmd_custom(const ExperimentConfig& cfg) {
  write_manifest(cfg);
  const fs::path dir(cfg.out_dir);
  try {
    const RunResult res = run_problem(cfg.setup);
    write_energy_csv(dir / "energy.csv", res.energy);

    const ProblemSpec& p = cfg.setup.problem;
    const RectMesh mesh =
        build_mesh(p.x0, p.x1, p.y0, p.y1, cfg.setup.nx, cfg.setup.ny);
    const DofMap dofmap = build_dofmap(mesh);
    const std::string stem = "snapshot_t" + fmtg(res.final_state.t);
    write_snapshot_vtk(dir / (stem + ".vtk"), mesh, dofmap,
                       res.final_state.coeffs,
                       "stream function at t=" + fmtg(res.final_state.t));
    write_snapshot_csv(dir / (stem + ".csv"), mesh, dofmap,
                       res.final_state.coeffs);

    const bool unit_square = p.x0 == 0.0 && p.x1 == 1.0 && p.y0 == 0.0 &&
                             p.y1 == 1.0;
    if (p.has_exact && unit_square) {
      const ManufacturedSolution exact;
      const NormReport err = error_norms(mesh, dofmap, res.final_state.coeffs,
                                         exact, res.final_state.t);
      auto out = open_out(dir / "errors.csv");
      out << "h,e_l2,e_h1,e_h2\n";
      out << fmt17(mesh.hx) << "," << fmt17(err.l2) << ","
          << fmt17(err.h1_semi) << "," << fmt17(err.h2_broken) << "\n";
    }
    return kExitOk;
  } catch (const SolveError& e) {
    std::cerr << "custom: solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

}  // namespace qg
