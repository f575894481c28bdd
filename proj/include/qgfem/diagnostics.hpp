#pragma once

#include <vector>

#include <Eigen/Core>

#include "qgfem/fields.hpp"
#include "qgfem/mesh.hpp"

namespace qg {

struct NormReport {
  double l2 = 0.0;
  double h1_semi = 0.0;   // |grad v|
  double h2_broken = 0.0; // element-wise |lap v|; the space is C^1, so this
                          // coincides with the global Laplacian norm
};

// Norms of a coefficient field, integrated cell by cell with the same
// 5x5 Gauss rule the assembly uses.
NormReport norms(const RectMesh& mesh, const DofMap& dofmap,
                 const Eigen::VectorXd& coeffs);

// Norms of (field - exact) at time t.
NormReport error_norms(const RectMesh& mesh, const DofMap& dofmap,
                       const Eigen::VectorXd& coeffs,
                       const AnalyticField& exact, double t);

// Experimental orders of convergence for a refinement sequence where each
// h (or dt) is half the previous one. Entry r of each vector is
// log2(e_r / e_{r+1}).
struct EocTable {
  std::vector<double> h;          // strictly halving
  std::vector<NormReport> error;  // same length as h
};

struct EocResult {
  std::vector<double> l2, h1, h2;  // length h.size() - 1
};

EocResult eoc(const EocTable& table);

// Least-squares slope of log(energy) against time over the trailing
// window_fraction of the samples (at least two). r2 is the coefficient of
// determination of that fit; a constant log-energy gives rate 0, r2 = 1.
struct FitResult {
  double rate = 0.0;
  double r2 = 1.0;
};

FitResult decay_rate(const std::vector<double>& times,
                     const std::vector<double>& energies,
                     double window_fraction = 0.5);

// True when the relative variation (max-min)/mean of the trailing `window`
// samples is at most tol. window must be in [2, size].
bool steady_state(const std::vector<double>& energies, int window, double tol);

}  // namespace qg
