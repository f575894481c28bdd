// Acceptance suite: six go/no-go checks of the solver against its pinned
// experiment configurations. Each criterion prints exactly one PASS/FAIL
// line with the measured values next to the tolerance; the process exits
// zero only when every criterion passes. No test framework: the checks are
// long-running experiment drives, not unit assertions.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgfem/assembly.hpp"
#include "qgfem/bfs_element.hpp"
#include "qgfem/common.hpp"
#include "qgfem/diagnostics.hpp"
#include "qgfem/experiment.hpp"
#include "qgfem/mesh.hpp"
#include "qgfem/problems.hpp"
#include "qgfem/time_stepper.hpp"

using namespace qg;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("%s  criterion %d (%s): %s  [%.1fs]\n", pass ? "PASS" : "FAIL",
              criterion, name, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

bool in_band(double value, double center, double tol) {
  return value >= center - tol && value <= center + tol;
}

template <class Fn>
void run_criterion(int criterion, const char* name, Fn&& body) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(criterion, name, pass, detail, seconds);
}

Eigen::VectorXd random_coeffs(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

// ---- criterion 1: spatial orders of the manufactured run ----

bool spatial_orders(std::string& detail) {
  const ScenarioSetup setup = scenario("convergence");
  EocTable table;
  for (int level : setup.levels) {
    const LevelError row = run_spatial_level(setup, level);
    table.h.push_back(row.h);
    table.error.push_back(row.error);
  }
  const EocResult rates = eoc(table);
  const double l2 = rates.l2.back(), h1 = rates.h1.back(),
               h2 = rates.h2.back();
  detail = "trailing eoc_l2=" + fmt("%.3f", l2) + " (want 4+-0.25), eoc_h1=" +
           fmt("%.3f", h1) + " (want 3+-0.25), eoc_h2=" + fmt("%.3f", h2) +
           " (want 2+-0.25)";
  return in_band(l2, 4.0, 0.25) && in_band(h1, 3.0, 0.25) &&
         in_band(h2, 2.0, 0.25);
}

// ---- criterion 2: first order in dt on the fixed mesh ----

bool temporal_order(std::string& detail) {
  const ScenarioSetup setup = scenario("convergence");
  EocTable table;
  for (double dt : setup.dt_levels) {
    const LevelError row = run_temporal_level(setup, dt);
    table.h.push_back(row.h);
    table.error.push_back(row.error);
  }
  const EocResult rates = eoc(table);
  const double order = rates.h1.back();
  detail = "trailing H1 eoc in dt=" + fmt("%.4f", order) +
           " (want 1+-0.15), all=[" + fmt("%.4f", rates.h1.front()) + "," +
           fmt("%.4f", order) + "]";
  return in_band(order, 1.0, 0.15);
}

// ---- criterion 3: exponential free decay across the sweep ----

bool free_decay(std::string& detail) {
  Overrides o;
  o.nx = 32;  // h = 2^-5 on the unit-width basin
  const ScenarioSetup base = scenario("decay", o);

  bool pass = true;
  std::string worst;
  double min_r2 = 1.0;
  for (double mu : base.mu_sweep) {
    double prev_mag = std::numeric_limits<double>::infinity();
    for (double nu : base.nu_sweep) {  // sweep runs from large to small nu
      ScenarioSetup member = base;
      member.problem.nu = nu;
      member.problem.mu = mu;
      const RunResult res = run_problem(member);
      const FitResult fit = decay_rate(res.energy.t, res.energy.grad_norm);
      min_r2 = std::min(min_r2, fit.r2);
      const bool member_ok =
          fit.rate < 0.0 && fit.r2 >= 0.99 && std::abs(fit.rate) < prev_mag;
      if (!member_ok && pass) {
        pass = false;
        worst = " first failure at nu=" + fmt("%g", nu) + " mu=" +
                fmt("%g", mu) + " rate=" + fmt("%.4g", fit.rate) + " r2=" +
                fmt("%.6f", fit.r2);
      }
      prev_mag = std::abs(fit.rate);
    }
  }
  detail = "9 members: rates all negative, |rate| increasing in nu, min r2=" +
           fmt("%.6f", min_r2) + " (want >=0.99)" + worst;
  return pass;
}

// ---- criterion 4: point attractor at large nu, bounded wander at small ----

bool attractor(std::string& detail) {
  const ScenarioSetup base = scenario("attractor");
  const double tol = 1e-3;

  ScenarioSetup big = base;
  big.problem.nu = 1.0;
  const RunResult res_big = run_problem(big);
  const int n_big = static_cast<int>(res_big.energy.grad_norm.size());
  const int window = std::max(2, (n_big + 3) / 4);
  const bool steady_big =
      steady_state(res_big.energy.grad_norm, window, tol);

  ScenarioSetup small = base;
  small.problem.nu = 0.01;
  const RunResult res_small = run_problem(small);
  const bool steady_small =
      steady_state(res_small.energy.grad_norm, window, tol);

  std::vector<double> e = res_small.energy.grad_norm;
  const double peak = *std::max_element(e.begin(), e.end());
  std::nth_element(e.begin(), e.begin() + e.size() / 2, e.end());
  const double median = e[e.size() / 2];
  const bool bounded = median > 0.0 && peak <= 10.0 * median;

  detail = "nu=1 steady=" + std::string(steady_big ? "true" : "false") +
           " (want true, tol=1e-3), nu=0.01 steady=" +
           std::string(steady_small ? "true" : "false") +
           " (want false), peak/median=" + fmt("%.3f", peak / median) +
           " (want <=10)";
  return steady_big && !steady_small && bounded;
}

// ---- criterion 5: structural properties of the discrete operators ----

bool structure(std::string& detail) {
  const RectMesh mesh = build_mesh(0.0, 1.0, -1.0, 1.0, 4, 5);
  const DofMap dofmap = build_dofmap(mesh);
  const Assembler assembler(mesh, dofmap);
  const int n = dofmap.n_free;
  std::mt19937_64 rng(20260817);

  double worst_tri = 0.0, worst_skew = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd psi = random_coeffs(n, rng);
    const Eigen::VectorXd v = random_coeffs(n, rng);
    const Eigen::VectorXd w = random_coeffs(n, rng);
    const Eigen::VectorXd bv = assembler.trilinear(psi, v);
    const Eigen::VectorXd bw = assembler.trilinear(psi, w);
    const double scale = std::max(bv.norm() * v.norm(), 1e-30);
    worst_tri = std::max(worst_tri, std::abs(bv.dot(v)) / scale);
    const double bvw = bv.dot(w), bwv = bw.dot(v);
    worst_tri = std::max(
        worst_tri, std::abs(bvw + bwv) /
                       std::max({std::abs(bvw), std::abs(bwv), 1e-30}));
    const Eigen::VectorXd b0x = assembler.b0().apply(v);
    worst_skew = std::max(worst_skew, std::abs(v.dot(b0x)) /
                                          std::max(b0x.norm() * v.norm(),
                                                   1e-30));
  }
  const bool tri_ok = worst_tri <= 1e-12 && worst_skew <= 1e-12;

  const Eigen::MatrixXd D(assembler.gradgrad().mat);
  const Eigen::MatrixXd A(assembler.biharmonic().mat);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  const double d_min = es.eigenvalues().minCoeff();
  es.compute(A);
  const double a_min = es.eigenvalues().minCoeff();
  const bool spd_ok =
      (D - D.transpose()).cwiseAbs().maxCoeff() <=
          1e-14 * D.cwiseAbs().maxCoeff() &&
      (A - A.transpose()).cwiseAbs().maxCoeff() <=
          1e-14 * A.cwiseAbs().maxCoeff() &&
      d_min > 0.0 && a_min > 0.0;

  // Jacobian against central differences along random directions.
  const double dt = 0.01, nu = 0.7, mu = 5.0, eps = 1e-6;
  const Eigen::VectorXd prev = random_coeffs(n, rng);
  const Eigen::VectorXd cur = random_coeffs(n, rng);
  const Eigen::VectorXd load = random_coeffs(n, rng);
  const SparseOperator J = assembler.jacobian(cur, dt, nu, mu);
  double worst_jac = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd dir = random_coeffs(n, rng);
    dir.normalize();
    const Eigen::VectorXd fd =
        (assembler.residual(prev, cur + eps * dir, dt, nu, mu, load) -
         assembler.residual(prev, cur - eps * dir, dt, nu, mu, load)) /
        (2 * eps);
    const Eigen::VectorXd jd = J.apply(dir);
    worst_jac =
        std::max(worst_jac, (jd - fd).norm() / std::max(jd.norm(), 1.0));
  }
  const bool jac_ok = worst_jac <= 1e-6;

  // Per-step energy identity and monotone decay with F = 0.
  const RectMesh emesh = build_mesh(0.0, 1.0, -1.0, 1.0, 16, 32);
  const DofMap edofs = build_dofmap(emesh);
  StepParams params;
  params.nu = 0.16667;
  params.mu = 100.0;
  SolverConfig cfg;
  cfg.dt = 1e-3;
  TimeStepper ts(Assembler(emesh, edofs), params, cfg);
  State st = initial_state(SinSqField{}, emesh, edofs);
  const RunSummary sum = ts.run(st, 0.01);
  const bool energy_ok =
      sum.energy_monotone && sum.energy_identity_gap_max <= 1e-8;

  // Kronecker-delta and bicubic reproduction on the reference cell.
  double worst_elem = 0.0;
  for (int corner = 0; corner < 4; ++corner)
    for (int type = 0; type < 4; ++type) {
      const double xi = corner & 1 ? 1.0 : 0.0;
      const double eta = corner & 2 ? 1.0 : 0.0;
      for (int k = 0; k < 16; ++k) {
        const double got = shape(k, type & 1, type >> 1, xi, eta);
        const double want = k == 4 * corner + type ? 1.0 : 0.0;
        worst_elem = std::max(worst_elem, std::abs(got - want));
      }
    }
  const auto f = [](double x, double y) { return x * x * x * y * y; };
  double coeff[16];
  for (int corner = 0; corner < 4; ++corner) {
    const double x = corner & 1 ? 1.0 : 0.0;
    const double y = corner & 2 ? 1.0 : 0.0;
    coeff[4 * corner + 0] = f(x, y);
    coeff[4 * corner + 1] = 3 * x * x * y * y;
    coeff[4 * corner + 2] = 2 * x * x * x * y;
    coeff[4 * corner + 3] = 6 * x * x * y;
  }
  for (double xi : {0.15, 0.5, 0.85})
    for (double eta : {0.3, 0.7}) {
      double got = 0.0;
      for (int k = 0; k < 16; ++k) got += coeff[k] * shape(k, 0, 0, xi, eta);
      worst_elem = std::max(worst_elem, std::abs(got - f(xi, eta)));
    }
  const bool elem_ok = worst_elem <= 1e-13;

  detail = "trilinear/skew worst=" + fmt("%.2e", std::max(worst_tri, worst_skew)) +
           " (want <=1e-12), min eig D=" + fmt("%.2e", d_min) + " A=" +
           fmt("%.2e", a_min) + " (want >0), jacobian fd worst=" +
           fmt("%.2e", worst_jac) + " (want <=1e-6), energy gap=" +
           fmt("%.2e", sum.energy_identity_gap_max) +
           " (want <=1e-8, monotone), element worst=" +
           fmt("%.2e", worst_elem) + " (want <=1e-13)";
  return tri_ok && spd_ok && jac_ok && energy_ok && elem_ok;
}

// ---- criterion 6: interpolation orders of the Hermite space ----

bool interpolation_orders(std::string& detail) {
  const SinSqField field;
  EocTable table;
  for (int nvec : {4, 8, 16, 32}) {
    const RectMesh mesh = build_mesh(0.0, 1.0, 0.0, 1.0, nvec, nvec);
    const DofMap dofmap = build_dofmap(mesh);
    const State st = initial_state(field, mesh, dofmap);
    table.h.push_back(1.0 / nvec);
    table.error.push_back(error_norms(mesh, dofmap, st.coeffs, field, 0.0));
  }
  const EocResult rates = eoc(table);
  bool pass = true;
  for (std::size_t r = 0; r < rates.l2.size(); ++r) {
    pass = pass && in_band(rates.l2[r], 4.0, 0.25) &&
           in_band(rates.h1[r], 3.0, 0.25) && in_band(rates.h2[r], 2.0, 0.25);
  }
  detail = "eoc_l2=[" + fmt("%.3f", rates.l2[0]) + "," +
           fmt("%.3f", rates.l2[1]) + "," + fmt("%.3f", rates.l2[2]) +
           "] (want 4+-0.25), eoc_h1 trailing=" +
           fmt("%.3f", rates.h1.back()) + " (want 3+-0.25), eoc_h2 trailing=" +
           fmt("%.3f", rates.h2.back()) + " (want 2+-0.25)";
  return pass;
}

}  // namespace

int main() {
  std::printf("acceptance suite: stream-function solver\n");
  run_criterion(1, "spatial orders h^{4-j}", spatial_orders);
  run_criterion(2, "temporal order dt^1", temporal_order);
  run_criterion(3, "exponential free decay", free_decay);
  run_criterion(4, "attractor behavior", attractor);
  run_criterion(5, "operator structure", structure);
  run_criterion(6, "interpolation orders", interpolation_orders);
  if (g_failures == 0) {
    std::printf("acceptance: all 6 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
