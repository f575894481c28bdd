#include "qgfem/problems.hpp"

#include <cmath>

#include "qgfem/common.hpp"

namespace qg {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Ramp factor and its time derivative.
inline double ramp(double t) { return -std::expm1(-t) / -std::expm1(-0.1); }
inline double ramp_dt(double t) { return std::exp(-t) / -std::expm1(-0.1); }

// sin^2(pi s) and its first four derivatives.
struct Sq {
  double f, d1, d2, d3, d4;
};
inline Sq sinsq(double s) {
  const double s1 = std::sin(kPi * s);
  const double s2 = std::sin(2.0 * kPi * s);
  const double c2 = std::cos(2.0 * kPi * s);
  Sq p;
  p.f = s1 * s1;
  p.d1 = kPi * s2;
  p.d2 = 2.0 * kPi * kPi * c2;
  p.d3 = -4.0 * kPi * kPi * kPi * s2;
  p.d4 = -8.0 * kPi * kPi * kPi * kPi * c2;
  return p;
}

}  // namespace

double ManufacturedSolution::value(double x, double y, double t) const {
  return ramp(t) * sinsq(x).f * sinsq(y).f;
}

double ManufacturedSolution::ddx(double x, double y, double t) const {
  return ramp(t) * sinsq(x).d1 * sinsq(y).f;
}

double ManufacturedSolution::ddy(double x, double y, double t) const {
  return ramp(t) * sinsq(x).f * sinsq(y).d1;
}

double ManufacturedSolution::dxy(double x, double y, double t) const {
  return ramp(t) * sinsq(x).d1 * sinsq(y).d1;
}

double ManufacturedSolution::laplacian(double x, double y, double t) const {
  const Sq u = sinsq(x), v = sinsq(y);
  return ramp(t) * (u.d2 * v.f + u.f * v.d2);
}

double ManufacturedSolution::dt_laplacian(double x, double y, double t) const {
  const Sq u = sinsq(x), v = sinsq(y);
  return ramp_dt(t) * (u.d2 * v.f + u.f * v.d2);
}

double ManufacturedSolution::bilaplacian(double x, double y, double t) const {
  const Sq u = sinsq(x), v = sinsq(y);
  return ramp(t) * (u.d4 * v.f + 2.0 * u.d2 * v.d2 + u.f * v.d4);
}

double ManufacturedSolution::advection(double x, double y, double t) const {
  const Sq u = sinsq(x), v = sinsq(y);
  const double g = ramp(t);
  // psi_y (lap psi)_x - psi_x (lap psi)_y, all through the separable parts.
  return g * g *
         (u.f * v.d1 * (u.d3 * v.f + u.d1 * v.d2) -
          u.d1 * v.f * (u.d2 * v.d1 + u.f * v.d3));
}

double manufactured_forcing(double x, double y, double t, double nu,
                            double mu) {
  if (mu == 0.0)
    throw ConfigError("manufactured_forcing: mu must be nonzero");
  // The assembled weak form tests the advection against chi by parts:
  // (J(psi, lap psi), chi) = -(lap psi, psi_y chi_x - psi_x chi_y) on the
  // clamped space. The strong equation consistent with the discrete
  // residual therefore carries -J, and so does the forcing.
  const ManufacturedSolution psi;
  return (-psi.dt_laplacian(x, y, t) + nu * psi.bilaplacian(x, y, t) -
          psi.advection(x, y, t)) /
             mu -
         psi.ddx(x, y, t);
}

double SinSqField::value(double x, double y, double) const {
  return sinsq(x).f * sinsq(y).f;
}

double SinSqField::ddx(double x, double y, double) const {
  return sinsq(x).d1 * sinsq(y).f;
}

double SinSqField::ddy(double x, double y, double) const {
  return sinsq(x).f * sinsq(y).d1;
}

double SinSqField::dxy(double x, double y, double) const {
  return sinsq(x).d1 * sinsq(y).d1;
}

double SinSqField::laplacian(double x, double y, double) const {
  const Sq u = sinsq(x), v = sinsq(y);
  return u.d2 * v.f + u.f * v.d2;
}

ForcingFn make_forcing(const ProblemSpec& spec) {
  switch (spec.forcing) {
    case ForcingKind::Zero:
      return {};
    case ForcingKind::SinPiY:
      return [](double, double y, double) { return std::sin(kPi * y); };
    case ForcingKind::Manufactured: {
      const double nu = spec.nu, mu = spec.mu;
      return [nu, mu](double x, double y, double t) {
        return manufactured_forcing(x, y, t, nu, mu);
      };
    }
  }
  return {};
}

std::shared_ptr<const AnalyticField> make_initial(const ProblemSpec& spec) {
  if (spec.initial == InitialKind::SinSqProduct)
    return std::make_shared<SinSqField>();
  return std::make_shared<ZeroField>();
}

ScenarioSetup scenario(const std::string& name, const Overrides& o) {
  ScenarioSetup s;
  s.name = name;
  if (name == "convergence") {
    s.problem = {0.0, 1.0, 0.0, 1.0, 1.6667, 1e3,
                 ForcingKind::Manufactured, InitialKind::Zero, true};
    s.solver.dt = 1e-3;
    s.solver.t_end = 0.1;
    s.nx = s.ny = 64;  // used by the fixed-mesh time study
    s.levels = {4, 8, 16, 32};
    s.dt_levels = {4e-3, 2e-3, 1e-3};
  } else if (name == "decay") {
    s.problem = {0.0, 1.0, -1.0, 1.0, 1.6667, 1e3,
                 ForcingKind::Zero, InitialKind::SinSqProduct, false};
    s.solver.dt = 1e-3;
    s.solver.t_end = 0.1;
    s.nx = 128;  // h = 2^-7
    s.ny = 256;
    s.nu_sweep = {1.6667, 0.16667, 0.016667};
    s.mu_sweep = {10.0, 100.0, 1000.0};
  } else if (name == "attractor") {
    s.problem = {0.0, 1.0, -1.0, 1.0, 1.0, 100.0,
                 ForcingKind::SinPiY, InitialKind::Zero, false};
    s.solver.dt = 2e-3;
    s.solver.t_end = 4.0;
    s.nx = 32;  // h = 2^-5
    s.ny = 64;
    s.nu_sweep = {1.0, 0.01, 0.0001};
    s.snapshot_times = {0.0, 1.0, 2.0, 3.0, 4.0};
  } else if (name == "custom") {
    s.problem = {0.0, 1.0, 0.0, 1.0, 1.0, 1.0,
                 ForcingKind::Zero, InitialKind::SinSqProduct, false};
    s.solver.dt = 1e-3;
    s.solver.t_end = 0.1;
    s.nx = s.ny = 32;
  } else {
    throw ConfigError("scenario: unknown name '" + name +
                      "' (known: convergence, decay, attractor, custom)");
  }

  if (o.nu) s.problem.nu = *o.nu;
  if (o.mu) s.problem.mu = *o.mu;
  if (o.dt) s.solver.dt = *o.dt;
  if (o.t_end) s.solver.t_end = *o.t_end;
  if (o.newton_tol) s.solver.newton_tol = *o.newton_tol;
  if (o.newton_abs_tol) s.solver.newton_abs_tol = *o.newton_abs_tol;
  if (o.threads) s.solver.threads = *o.threads;
  if (o.nx) {
    s.nx = *o.nx;
    if (!o.ny) {
      const double aspect =
          (s.problem.y1 - s.problem.y0) / (s.problem.x1 - s.problem.x0);
      s.ny = static_cast<int>(std::lround(s.nx * aspect));
    }
  }
  if (o.ny) s.ny = *o.ny;

  if (!(s.problem.nu > 0.0))
    throw ConfigError("scenario: nu must be positive");
  if (s.problem.forcing == ForcingKind::Manufactured && s.problem.mu == 0.0)
    throw ConfigError("scenario: manufactured forcing needs nonzero mu");
  if (!(s.solver.dt > 0.0) || !(s.solver.t_end > 0.0))
    throw ConfigError("scenario: dt and t_end must be positive");
  if (s.nx < 2 || s.ny < 2)
    throw ConfigError("scenario: mesh needs at least 2 cells per direction");
  if (s.solver.threads < 1)
    throw ConfigError("scenario: threads must be at least 1");
  return s;
}

}  // namespace qg
