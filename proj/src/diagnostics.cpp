#include "qgfem/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qgfem/bfs_element.hpp"
#include "qgfem/common.hpp"
#include "qgfem/quadrature.hpp"

namespace qg {

namespace {

// Shared cell loop: accumulates integrals of (v - ref)^2, |grad (v - ref)|^2
// and (lap (v - ref))^2, where ref may be null for plain norms.
NormReport integrate(const RectMesh& mesh, const DofMap& dofmap,
                     const Eigen::VectorXd& coeffs, const AnalyticField* exact,
                     double t) {
  const QuadratureRule rule = make_quadrature();
  const ReferenceBasis basis = build_reference_basis(rule);
  const auto scale = physical_dof_scaling(mesh.hx, mesh.hy);
  const double ihx = 1.0 / mesh.hx, ihy = 1.0 / mesh.hy;
  const int nq = QuadratureRule::kPoints;

  double acc_l2 = 0.0, acc_h1 = 0.0, acc_h2 = 0.0;
  for (int cj = 0; cj < mesh.ny; ++cj)
    for (int ci = 0; ci < mesh.nx; ++ci) {
      const auto nodes = mesh.cell_nodes(ci, cj);
      double c[16];
      for (int corner = 0; corner < 4; ++corner)
        for (int comp = 0; comp < kDofsPerNode; ++comp) {
          const int g = dofmap(nodes[corner], comp);
          const int k = 4 * corner + comp;
          c[k] = g >= 0 ? scale[k] * coeffs[g] : 0.0;
        }
      const double xb = mesh.x0 + ci * mesh.hx;
      const double yb = mesh.y0 + cj * mesh.hy;
      for (int q = 0; q < nq; ++q) {
        double v = 0.0, vx = 0.0, vy = 0.0, lap = 0.0;
        for (int k = 0; k < 16; ++k) {
          v += c[k] * basis.val[k * nq + q];
          vx += c[k] * basis.dxi[k * nq + q];
          vy += c[k] * basis.deta[k * nq + q];
          lap += c[k] * (basis.dxx[k * nq + q] * ihx * ihx +
                         basis.dyy[k * nq + q] * ihy * ihy);
        }
        vx *= ihx;
        vy *= ihy;
        if (exact) {
          const double xq = xb + rule.xi[q] * mesh.hx;
          const double yq = yb + rule.eta[q] * mesh.hy;
          v -= exact->value(xq, yq, t);
          vx -= exact->ddx(xq, yq, t);
          vy -= exact->ddy(xq, yq, t);
          lap -= exact->laplacian(xq, yq, t);
        }
        const double wq = rule.w[q] * mesh.hx * mesh.hy;
        acc_l2 += wq * v * v;
        acc_h1 += wq * (vx * vx + vy * vy);
        acc_h2 += wq * lap * lap;
      }
    }

  NormReport out;
  out.l2 = std::sqrt(acc_l2);
  out.h1_semi = std::sqrt(acc_h1);
  out.h2_broken = std::sqrt(acc_h2);
  return out;
}

}  // namespace

NormReport norms(const RectMesh& mesh, const DofMap& dofmap,
                 const Eigen::VectorXd& coeffs) {
  return integrate(mesh, dofmap, coeffs, nullptr, 0.0);
}

NormReport error_norms(const RectMesh& mesh, const DofMap& dofmap,
                       const Eigen::VectorXd& coeffs,
                       const AnalyticField& exact, double t) {
  return integrate(mesh, dofmap, coeffs, &exact, t);
}

EocResult eoc(const EocTable& table) {
  const std::size_t n = table.h.size();
  if (n != table.error.size())
    throw DataError("eoc: h and error lists differ in length");
  if (n < 1) throw DataError("eoc: empty table");
  for (std::size_t r = 0; r + 1 < n; ++r) {
    const double ratio = table.h[r] / table.h[r + 1];
    if (std::abs(ratio - 2.0) > 1e-9 * 2.0)
      throw DataError("eoc: refinement must halve h at every level");
  }
  EocResult out;
  const auto rate = [](double coarse, double fine) {
    if (!(coarse > 0.0) || !(fine > 0.0))
      throw DataError("eoc: errors must be positive, order undefined");
    return std::log2(coarse / fine);
  };
  for (std::size_t r = 0; r + 1 < n; ++r) {
    out.l2.push_back(rate(table.error[r].l2, table.error[r + 1].l2));
    out.h1.push_back(rate(table.error[r].h1_semi, table.error[r + 1].h1_semi));
    out.h2.push_back(
        rate(table.error[r].h2_broken, table.error[r + 1].h2_broken));
  }
  return out;
}

FitResult decay_rate(const std::vector<double>& times,
                     const std::vector<double>& energies,
                     double window_fraction) {
  if (times.size() != energies.size())
    throw DataError("decay_rate: times and energies differ in length");
  if (!(window_fraction > 0.0) || window_fraction > 1.0)
    throw DataError("decay_rate: window fraction must be in (0, 1]");
  const int n = static_cast<int>(times.size());
  const int w = std::max(2, static_cast<int>(std::ceil(n * window_fraction)));
  if (w > n)
    throw DataError("decay_rate: need at least two samples in the window");
  const int begin = n - w;

  double st = 0.0, sl = 0.0, max_abs_log = 0.0;
  for (int i = begin; i < n; ++i) {
    if (!(energies[i] > 0.0)) {
      std::ostringstream msg;
      msg << "decay_rate: nonpositive energy " << energies[i]
          << " at t=" << times[i] << ", log fit undefined";
      throw DataError(msg.str());
    }
    st += times[i];
    sl += std::log(energies[i]);
    max_abs_log = std::max(max_abs_log, std::abs(std::log(energies[i])));
  }
  const double mt = st / w, ml = sl / w;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (int i = begin; i < n; ++i) {
    const double dt = times[i] - mt;
    const double dl = std::log(energies[i]) - ml;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  if (!(stt > 0.0))
    throw DataError("decay_rate: all window times coincide, slope undefined");

  FitResult fit;
  // Log-energy variation below the rounding noise of the samples means the
  // series is constant as far as the data can tell; report the exact flat
  // fit instead of an r2 made of noise.
  const double noise =
      8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, max_abs_log);
  if (sll <= w * noise * noise) return fit;
  fit.rate = stl / stt;
  const double ss_res = sll - stl * stl / stt;
  fit.r2 = std::max(0.0, 1.0 - ss_res / sll);
  return fit;
}

bool steady_state(const std::vector<double>& energies, int window, double tol) {
  const int n = static_cast<int>(energies.size());
  if (window < 2 || window > n)
    throw DataError("steady_state: window must be between 2 and the history "
                    "length");
  double lo = energies[n - window], hi = lo, sum = 0.0;
  for (int i = n - window; i < n; ++i) {
    lo = std::min(lo, energies[i]);
    hi = std::max(hi, energies[i]);
    sum += energies[i];
  }
  const double mean = sum / window;
  const double denom = std::max(std::abs(mean), 1e-300);
  return (hi - lo) / denom <= tol;
}

}  // namespace qg
