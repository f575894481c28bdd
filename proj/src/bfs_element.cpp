#include "qgfem/bfs_element.hpp"

#include <algorithm>
#include <cmath>

namespace qg {

double hermite1d(int d, int side, int deriv, double s) {
  // Rows: (d,side) = (0,0),(1,0),(0,1),(1,1); entries are the cubics and
  // their first two derivatives written out by hand.
  if (d == 0 && side == 0) {
    switch (deriv) {
      case 0: return 1.0 + s * s * (-3.0 + 2.0 * s);
      case 1: return s * (-6.0 + 6.0 * s);
      default: return -6.0 + 12.0 * s;
    }
  }
  if (d == 1 && side == 0) {
    switch (deriv) {
      case 0: return s * (1.0 + s * (-2.0 + s));
      case 1: return 1.0 + s * (-4.0 + 3.0 * s);
      default: return -4.0 + 6.0 * s;
    }
  }
  if (d == 0 && side == 1) {
    switch (deriv) {
      case 0: return s * s * (3.0 - 2.0 * s);
      case 1: return s * (6.0 - 6.0 * s);
      default: return 6.0 - 12.0 * s;
    }
  }
  switch (deriv) {  // d == 1, side == 1
    case 0: return s * s * (-1.0 + s);
    case 1: return s * (-2.0 + 3.0 * s);
    default: return -2.0 + 6.0 * s;
  }
}

double shape(int k, int dxo, int dyo, double xi, double eta) {
  const int corner = k / 4;
  const int type = k % 4;
  const int ax = corner & 1, ay = corner >> 1;
  const int dx = type & 1, dy = type >> 1;
  return hermite1d(dx, ax, dxo, xi) * hermite1d(dy, ay, dyo, eta);
}

std::array<double, 16> physical_dof_scaling(double hx, double hy) {
  std::array<double, 16> s;
  for (int k = 0; k < 16; ++k) {
    const int type = k % 4;
    s[k] = ((type & 1) ? hx : 1.0) * ((type >> 1) ? hy : 1.0);
  }
  return s;
}

ReferenceBasis build_reference_basis(const QuadratureRule& rule) {
  ReferenceBasis b;
  b.nq = QuadratureRule::kPoints;
  const auto fill = [&](std::vector<double>& table, int dxo, int dyo) {
    table.resize(16 * b.nq);
    for (int k = 0; k < 16; ++k)
      for (int q = 0; q < b.nq; ++q)
        table[k * b.nq + q] = shape(k, dxo, dyo, rule.xi[q], rule.eta[q]);
  };
  fill(b.val, 0, 0);
  fill(b.dxi, 1, 0);
  fill(b.deta, 0, 1);
  fill(b.dxx, 2, 0);
  fill(b.dxy, 1, 1);
  fill(b.dyy, 0, 2);
  return b;
}

PointSample evaluate_field(const RectMesh& mesh, const DofMap& dofmap,
                           const Eigen::VectorXd& coeffs, double x, double y) {
  // Clamp onto the closed domain so boundary samples land in a valid cell.
  int ci = static_cast<int>(std::floor((x - mesh.x0) / mesh.hx));
  int cj = static_cast<int>(std::floor((y - mesh.y0) / mesh.hy));
  ci = std::clamp(ci, 0, mesh.nx - 1);
  cj = std::clamp(cj, 0, mesh.ny - 1);
  const double xi = (x - mesh.x0) / mesh.hx - ci;
  const double eta = (y - mesh.y0) / mesh.hy - cj;

  const auto nodes = mesh.cell_nodes(ci, cj);
  const auto scale = physical_dof_scaling(mesh.hx, mesh.hy);

  PointSample p;
  for (int c = 0; c < 4; ++c)
    for (int t = 0; t < kDofsPerNode; ++t) {
      const int g = dofmap(nodes[c], t);
      if (g == DofMap::kConstrained) continue;
      const int k = 4 * c + t;
      const double ck = scale[k] * coeffs[g];
      if (ck == 0.0) continue;
      p.value += ck * shape(k, 0, 0, xi, eta);
      p.ddx += ck * shape(k, 1, 0, xi, eta) / mesh.hx;
      p.ddy += ck * shape(k, 0, 1, xi, eta) / mesh.hy;
      p.dxx += ck * shape(k, 2, 0, xi, eta) / (mesh.hx * mesh.hx);
      p.dxy += ck * shape(k, 1, 1, xi, eta) / (mesh.hx * mesh.hy);
      p.dyy += ck * shape(k, 0, 2, xi, eta) / (mesh.hy * mesh.hy);
    }
  return p;
}

}  // namespace qg
