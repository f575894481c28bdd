#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qgfem/assembly.hpp"
#include "qgfem/fields.hpp"
#include "qgfem/time_stepper.hpp"

namespace qg {

// Exact solution used by the convergence studies:
//   psi(x,y,t) = (1 - e^-t)/(1 - e^-0.1) * sin^2(pi x) sin^2(pi y)
// Clamped on the unit square, zero at t = 0, amplitude 1 at t = 0.1.
// All derivatives are closed forms of the separable factors.
class ManufacturedSolution final : public AnalyticField {
 public:
  double value(double x, double y, double t) const override;
  double ddx(double x, double y, double t) const override;
  double ddy(double x, double y, double t) const override;
  double dxy(double x, double y, double t) const override;
  double laplacian(double x, double y, double t) const override;

  double dt_laplacian(double x, double y, double t) const;
  double bilaplacian(double x, double y, double t) const;
  // J(psi, lap psi) = psi_y (lap psi)_x - psi_x (lap psi)_y
  double advection(double x, double y, double t) const;
};

// Forcing that makes the manufactured field solve the discretized equation:
//   F = (1/mu) (-d/dt lap psi + nu lap^2 psi - J(psi, lap psi)) - psi_x.
// The -J sign matches the weak form, whose trilinear term carries the
// advection integrated by parts onto the test function.
double manufactured_forcing(double x, double y, double t, double nu, double mu);

// sin^2(pi x) sin^2(pi y), time-independent; clamped on any rectangle with
// integer corner coordinates, in particular (0,1) x (-1,1).
class SinSqField final : public AnalyticField {
 public:
  double value(double x, double y, double t) const override;
  double ddx(double x, double y, double t) const override;
  double ddy(double x, double y, double t) const override;
  double dxy(double x, double y, double t) const override;
  double laplacian(double x, double y, double t) const override;
};

enum class ForcingKind { Zero, SinPiY, Manufactured };
enum class InitialKind { Zero, SinSqProduct };

struct ProblemSpec {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  double nu = 1.0;
  double mu = 1.0;
  ForcingKind forcing = ForcingKind::Zero;
  InitialKind initial = InitialKind::Zero;
  bool has_exact = false;  // manufactured runs can measure errors
};

// Pointwise forcing callable for assembly; empty for zero forcing.
ForcingFn make_forcing(const ProblemSpec& spec);

std::shared_ptr<const AnalyticField> make_initial(const ProblemSpec& spec);

// A named experiment with every knob resolved: problem, solver settings,
// mesh resolution, and the sweep/level lists its command iterates over.
struct ScenarioSetup {
  std::string name;
  ProblemSpec problem;
  SolverConfig solver;
  int nx = 32, ny = 32;

  std::vector<int> levels;          // convergence: mesh sizes per level
  std::vector<double> dt_levels;    // convergence: step sizes, time mode
  std::vector<double> nu_sweep;     // decay, attractor
  std::vector<double> mu_sweep;     // decay
  std::vector<double> snapshot_times;  // attractor
};

struct Overrides {
  std::optional<double> nu, mu, dt, t_end, newton_tol, newton_abs_tol;
  std::optional<int> nx, ny, threads;
};

// Known names: convergence, decay, attractor, custom. Deterministic in
// (name, overrides). Overriding nx without ny rescales ny so cells stay
// square on the scenario's domain.
ScenarioSetup scenario(const std::string& name, const Overrides& o = {});

}  // namespace qg
