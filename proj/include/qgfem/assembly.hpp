#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "qgfem/bfs_element.hpp"
#include "qgfem/mesh.hpp"
#include "qgfem/quadrature.hpp"

namespace qg {

// Sparse matrix over the free unknowns, compressed row storage with sorted
// column indices. Backed by Eigen so it can feed the direct solver and
// matrix-vector products without conversion.
struct SparseOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> mat;

  int rows() const { return static_cast<int>(mat.rows()); }
  int cols() const { return static_cast<int>(mat.cols()); }
  int nonzeros() const { return static_cast<int>(mat.nonZeros()); }

  const int* row_offsets() const { return mat.outerIndexPtr(); }
  const int* col_indices() const { return mat.innerIndexPtr(); }
  const double* values() const { return mat.valuePtr(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return mat * x; }
  double quad(const Eigen::VectorXd& x) const { return x.dot(mat * x); }
};

using ForcingFn = std::function<double(double x, double y, double t)>;

// Builds and applies the discrete operators of the stream-function system:
//
//   D  = (grad u, grad v)          symmetric positive definite
//   A  = (lap u, lap v)            symmetric positive definite
//   B0 = -(du/dx, v)               skew-symmetric on the clamped space
//   b(psi; v, w) = (lap psi, dv/dy dw/dx - dv/dx dw/dy)
//
// The sparsity pattern, the per-cell scatter positions, and the shape-value
// tables (with the Hermite size scalings and the cell Jacobian folded in)
// are all precomputed once at construction. Every operator shares one
// pattern, so Newton can combine value arrays without re-symbolizing.
//
// Cell loops in the psi-dependent kernels run in parallel; each worker
// fills per-cell buffers which are then reduced in cell order, so results
// are bit-identical for any thread count.
class Assembler {
 public:
  Assembler(const RectMesh& mesh, const DofMap& dofmap, int threads = 1);

  const RectMesh& mesh() const { return mesh_; }
  const DofMap& dofmap() const { return dofmap_; }
  int n_free() const { return dofmap_.n_free; }
  int threads() const { return threads_; }

  SparseOperator gradgrad() const;
  SparseOperator biharmonic() const;
  SparseOperator b0() const;

  // Entries mu * (f(.,t), chi_i). Throws AssemblyError if f produces a
  // non-finite value, naming the offending quadrature point.
  Eigen::VectorXd load(const ForcingFn& f, double t, double mu) const;

  // r_i = b(psi; v, chi_i).
  Eigen::VectorXd trilinear(const Eigen::VectorXd& psi,
                            const Eigen::VectorXd& v) const;

  // Backward Euler residual at the candidate state cur:
  //   R = D (cur - prev)/dt + nu A cur + b(cur; cur, .) + mu B0 cur - load.
  // Throws SolveError when the result has non-finite entries.
  Eigen::VectorXd residual(const Eigen::VectorXd& prev,
                           const Eigen::VectorXd& cur, double dt, double nu,
                           double mu, const Eigen::VectorXd& load) const;

  // Exact derivative of the residual with respect to cur:
  //   J = D/dt + nu A + mu B0 + [b(., cur, .) + b(cur, ., .)].
  SparseOperator jacobian(const Eigen::VectorXd& cur, double dt, double nu,
                          double mu) const;

  // Quadratic forms of the cached operators, used for energy diagnostics
  // without rebuilding matrices: |grad v|^2 = x' D x, |lap v|^2 = x' A x.
  double quad_gradgrad(const Eigen::VectorXd& x) const;
  double quad_biharmonic(const Eigen::VectorXd& x) const;

 private:
  using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  using Map = Eigen::Map<const SpMatR>;

  Map view(const std::vector<double>& values) const;
  SparseOperator make_operator(const std::vector<double>& values) const;
  void scatter_cells(const std::vector<std::array<double, 256>>& local,
                     std::vector<double>& values) const;
  std::vector<std::array<double, 256>> trilinear_jacobian_cells(
      const Eigen::VectorXd& cur) const;

  RectMesh mesh_;
  DofMap dofmap_;
  int threads_ = 1;

  QuadratureRule rule_;
  // Scaled tables, indexed [k][q]: value, d/dx, d/dy, laplacian of the
  // physical shape function on a cell (uniform mesh: identical for all).
  std::array<std::array<double, QuadratureRule::kPoints>, 16> V_, X_, Y_, L_;
  std::array<double, QuadratureRule::kPoints> wq_;  // weight * cell area

  std::vector<std::array<int, 16>> cell_dofs_;
  std::vector<int> row_ptr_, col_idx_;
  std::vector<std::array<int, 256>> scatter_;

  std::vector<double> Dv_, Av_, B0v_;  // cached operator values
};

}  // namespace qg
