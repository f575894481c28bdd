#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "qgfem/mesh.hpp"
#include "qgfem/quadrature.hpp"

namespace qg {

// Bicubic Hermite (Bogner-Fox-Schmit) element on the reference cell [0,1]^2.
//
// The 16 shape functions are tensor products of the 1D cubic Hermite pairs
//   h00(s) = 1 - 3s^2 + 2s^3   (value at s=0)
//   h10(s) = s - 2s^2 + s^3    (slope at s=0)
//   h01(s) = 3s^2 - 2s^3       (value at s=1)
//   h11(s) = -s^2 + s^3        (slope at s=1)
// Local numbering: k = 4*corner + type, corners in cell_nodes() order
// (0,0),(1,0),(0,1),(1,1), type in (value, d/dxi, d/deta, d2/dxideta),
// matching the per-node component order of the global unknowns.

// 1D Hermite shape: dof order d (0 value, 1 slope), side (0 left, 1 right),
// evaluated derivative deriv in {0,1,2}.
double hermite1d(int d, int side, int deriv, double s);

// Shape k with mixed derivative (dxo, dyo), each order in {0,1,2}.
double shape(int k, int dxo, int dyo, double xi, double eta);

// Scale factors turning physical nodal data (value, du/dx, du/dy, d2u/dxdy)
// into reference-cell Hermite coefficients on a cell of size hx x hy:
// slope DOFs pick up one factor of the cell size per differentiated
// direction, so the local interpolant is c_k = s_k * (global DOF value).
std::array<double, 16> physical_dof_scaling(double hx, double hy);

// Shape values and reference derivatives tabulated at the quadrature points.
// Layout: table[k * nq + q]. These are computed once per run; every assembly
// loop reads them instead of re-evaluating polynomials.
struct ReferenceBasis {
  int nq = 0;
  std::vector<double> val, dxi, deta, dxx, dxy, dyy;
};

ReferenceBasis build_reference_basis(const QuadratureRule& rule);

// Pointwise reconstruction of a coefficient field, derivatives through
// second order. Constrained boundary unknowns contribute zero.
struct PointSample {
  double value = 0.0;
  double ddx = 0.0, ddy = 0.0;
  double dxx = 0.0, dxy = 0.0, dyy = 0.0;
  double laplacian() const { return dxx + dyy; }
};

PointSample evaluate_field(const RectMesh& mesh, const DofMap& dofmap,
                           const Eigen::VectorXd& coeffs, double x, double y);

}  // namespace qg
