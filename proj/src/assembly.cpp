#include "qgfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qgfem/common.hpp"

namespace qg {

namespace {

// Local matrices use k = 4*corner + component, matching cell_nodes() order.
inline int local_index(int corner, int comp) { return 4 * corner + comp; }

}  // namespace

Assembler::Assembler(const RectMesh& mesh, const DofMap& dofmap, int threads)
    : mesh_(mesh), dofmap_(dofmap), threads_(std::max(1, threads)),
      rule_(make_quadrature()) {
  const ReferenceBasis basis = build_reference_basis(rule_);
  const auto scale = physical_dof_scaling(mesh_.hx, mesh_.hy);
  const double ihx = 1.0 / mesh_.hx, ihy = 1.0 / mesh_.hy;
  const int nq = QuadratureRule::kPoints;

  for (int k = 0; k < 16; ++k)
    for (int q = 0; q < nq; ++q) {
      const double s = scale[k];
      V_[k][q] = s * basis.val[k * nq + q];
      X_[k][q] = s * basis.dxi[k * nq + q] * ihx;
      Y_[k][q] = s * basis.deta[k * nq + q] * ihy;
      L_[k][q] = s * (basis.dxx[k * nq + q] * ihx * ihx +
                      basis.dyy[k * nq + q] * ihy * ihy);
    }
  for (int q = 0; q < nq; ++q) wq_[q] = rule_.w[q] * mesh_.hx * mesh_.hy;

  // Cell -> free-unknown connectivity.
  cell_dofs_.resize(mesh_.cell_count());
  for (int cj = 0; cj < mesh_.ny; ++cj)
    for (int ci = 0; ci < mesh_.nx; ++ci) {
      auto& dofs = cell_dofs_[cj * mesh_.nx + ci];
      const auto nodes = mesh_.cell_nodes(ci, cj);
      for (int c = 0; c < 4; ++c)
        for (int t = 0; t < kDofsPerNode; ++t)
          dofs[local_index(c, t)] = dofmap_(nodes[c], t);
    }

  // Shared sparsity pattern with sorted columns.
  const int n = dofmap_.n_free;
  std::vector<std::vector<int>> cols(n);
  for (auto& row : cols) row.reserve(40);
  for (const auto& dofs : cell_dofs_)
    for (int i = 0; i < 16; ++i) {
      if (dofs[i] < 0) continue;
      auto& row = cols[dofs[i]];
      for (int k = 0; k < 16; ++k)
        if (dofs[k] >= 0) row.push_back(dofs[k]);
    }
  row_ptr_.assign(n + 1, 0);
  for (int r = 0; r < n; ++r) {
    auto& row = cols[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    row_ptr_[r + 1] = row_ptr_[r] + static_cast<int>(row.size());
  }
  col_idx_.resize(row_ptr_[n]);
  for (int r = 0; r < n; ++r)
    std::copy(cols[r].begin(), cols[r].end(), col_idx_.begin() + row_ptr_[r]);

  scatter_.resize(cell_dofs_.size());
  for (std::size_t cell = 0; cell < cell_dofs_.size(); ++cell) {
    const auto& dofs = cell_dofs_[cell];
    auto& pos = scatter_[cell];
    for (int i = 0; i < 16; ++i)
      for (int k = 0; k < 16; ++k) {
        const int gi = dofs[i], gk = dofs[k];
        if (gi < 0 || gk < 0) {
          pos[i * 16 + k] = -1;
          continue;
        }
        const auto first = col_idx_.begin() + row_ptr_[gi];
        const auto last = col_idx_.begin() + row_ptr_[gi + 1];
        pos[i * 16 + k] =
            static_cast<int>(std::lower_bound(first, last, gk) - col_idx_.begin());
      }
  }

  // The three constant operators share one local matrix each (uniform mesh),
  // scattered over all cells.
  std::array<double, 256> locD{}, locA{}, locB{};
  for (int q = 0; q < QuadratureRule::kPoints; ++q)
    for (int i = 0; i < 16; ++i)
      for (int k = 0; k < 16; ++k) {
        locD[i * 16 + k] += wq_[q] * (X_[i][q] * X_[k][q] + Y_[i][q] * Y_[k][q]);
        locA[i * 16 + k] += wq_[q] * L_[i][q] * L_[k][q];
        locB[i * 16 + k] -= wq_[q] * X_[k][q] * V_[i][q];
      }
  const auto scatter_same = [&](const std::array<double, 256>& loc,
                                std::vector<double>& values) {
    values.assign(col_idx_.size(), 0.0);
    for (const auto& pos : scatter_)
      for (int e = 0; e < 256; ++e)
        if (pos[e] >= 0) values[pos[e]] += loc[e];
  };
  scatter_same(locD, Dv_);
  scatter_same(locA, Av_);
  scatter_same(locB, B0v_);
}

Assembler::Map Assembler::view(const std::vector<double>& values) const {
  const int n = dofmap_.n_free;
  return Map(n, n, static_cast<int>(values.size()), row_ptr_.data(),
             col_idx_.data(), values.data());
}

SparseOperator Assembler::make_operator(const std::vector<double>& values) const {
  SparseOperator op;
  op.mat = view(values);
  return op;
}

SparseOperator Assembler::gradgrad() const { return make_operator(Dv_); }
SparseOperator Assembler::biharmonic() const { return make_operator(Av_); }
SparseOperator Assembler::b0() const { return make_operator(B0v_); }

double Assembler::quad_gradgrad(const Eigen::VectorXd& x) const {
  return x.dot(view(Dv_) * x);
}

double Assembler::quad_biharmonic(const Eigen::VectorXd& x) const {
  return x.dot(view(Av_) * x);
}

Eigen::VectorXd Assembler::load(const ForcingFn& f, double t, double mu) const {
  const int ncells = mesh_.cell_count();
  std::vector<std::array<double, 16>> local(ncells);

  parallel_for(ncells, threads_, [&](int cell) {
    const int ci = cell % mesh_.nx, cj = cell / mesh_.nx;
    const double xb = mesh_.x0 + ci * mesh_.hx;
    const double yb = mesh_.y0 + cj * mesh_.hy;
    auto& r = local[cell];
    r.fill(0.0);
    for (int q = 0; q < QuadratureRule::kPoints; ++q) {
      const double xq = xb + rule_.xi[q] * mesh_.hx;
      const double yq = yb + rule_.eta[q] * mesh_.hy;
      const double fv = f(xq, yq, t);
      if (!std::isfinite(fv)) {
        std::ostringstream msg;
        msg << "load: forcing is not finite at quadrature point (" << xq << ", "
            << yq << "), t=" << t;
        throw AssemblyError(msg.str());
      }
      const double c = mu * wq_[q] * fv;
      for (int i = 0; i < 16; ++i) r[i] += c * V_[i][q];
    }
  });

  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofmap_.n_free);
  for (int cell = 0; cell < ncells; ++cell) {
    const auto& dofs = cell_dofs_[cell];
    for (int i = 0; i < 16; ++i)
      if (dofs[i] >= 0) out[dofs[i]] += local[cell][i];
  }
  return out;
}

Eigen::VectorXd Assembler::trilinear(const Eigen::VectorXd& psi,
                                     const Eigen::VectorXd& v) const {
  const int ncells = mesh_.cell_count();
  std::vector<std::array<double, 16>> local(ncells);

  parallel_for(ncells, threads_, [&](int cell) {
    const auto& dofs = cell_dofs_[cell];
    double cp[16], cv[16];
    for (int k = 0; k < 16; ++k) {
      cp[k] = dofs[k] >= 0 ? psi[dofs[k]] : 0.0;
      cv[k] = dofs[k] >= 0 ? v[dofs[k]] : 0.0;
    }
    auto& r = local[cell];
    r.fill(0.0);
    for (int q = 0; q < QuadratureRule::kPoints; ++q) {
      double lap = 0.0, vx = 0.0, vy = 0.0;
      for (int k = 0; k < 16; ++k) {
        lap += cp[k] * L_[k][q];
        vx += cv[k] * X_[k][q];
        vy += cv[k] * Y_[k][q];
      }
      const double a = wq_[q] * lap * vy;   // multiplies dw/dx
      const double b = -wq_[q] * lap * vx;  // multiplies dw/dy
      for (int i = 0; i < 16; ++i) r[i] += a * X_[i][q] + b * Y_[i][q];
    }
  });

  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofmap_.n_free);
  for (int cell = 0; cell < ncells; ++cell) {
    const auto& dofs = cell_dofs_[cell];
    for (int i = 0; i < 16; ++i)
      if (dofs[i] >= 0) out[dofs[i]] += local[cell][i];
  }
  return out;
}

Eigen::VectorXd Assembler::residual(const Eigen::VectorXd& prev,
                                    const Eigen::VectorXd& cur, double dt,
                                    double nu, double mu,
                                    const Eigen::VectorXd& load) const {
  Eigen::VectorXd r = view(Dv_) * ((cur - prev) / dt);
  r.noalias() += nu * (view(Av_) * cur);
  r.noalias() += mu * (view(B0v_) * cur);
  r += trilinear(cur, cur);
  r -= load;
  if (!r.allFinite())
    throw SolveError("residual: non-finite entries (diverged state)");
  return r;
}

std::vector<std::array<double, 256>> Assembler::trilinear_jacobian_cells(
    const Eigen::VectorXd& cur) const {
  const int ncells = mesh_.cell_count();
  std::vector<std::array<double, 256>> local(ncells);

  parallel_for(ncells, threads_, [&](int cell) {
    const auto& dofs = cell_dofs_[cell];
    double cp[16];
    for (int k = 0; k < 16; ++k) cp[k] = dofs[k] >= 0 ? cur[dofs[k]] : 0.0;
    auto& m = local[cell];
    m.fill(0.0);
    for (int q = 0; q < QuadratureRule::kPoints; ++q) {
      double lap = 0.0, px = 0.0, py = 0.0;
      for (int k = 0; k < 16; ++k) {
        lap += cp[k] * L_[k][q];
        px += cp[k] * X_[k][q];
        py += cp[k] * Y_[k][q];
      }
      // d/dc_k of b(cur; cur, chi_i) at fixed cur splits into the two slots:
      //   b(phi_k; cur, chi_i) + b(cur; phi_k, chi_i)
      // = (L_k)(py X_i - px Y_i) + lap (Y_k X_i - X_k Y_i), times the weight.
      double u[16], w[16];
      for (int k = 0; k < 16; ++k) {
        u[k] = wq_[q] * (py * L_[k][q] + lap * Y_[k][q]);
        w[k] = -wq_[q] * (px * L_[k][q] + lap * X_[k][q]);
      }
      for (int i = 0; i < 16; ++i) {
        const double xi = X_[i][q], yi = Y_[i][q];
        double* row = m.data() + i * 16;
        for (int k = 0; k < 16; ++k) row[k] += xi * u[k] + yi * w[k];
      }
    }
  });
  return local;
}

void Assembler::scatter_cells(const std::vector<std::array<double, 256>>& local,
                              std::vector<double>& values) const {
  for (std::size_t cell = 0; cell < local.size(); ++cell) {
    const auto& pos = scatter_[cell];
    const auto& m = local[cell];
    for (int e = 0; e < 256; ++e)
      if (pos[e] >= 0) values[pos[e]] += m[e];
  }
}

SparseOperator Assembler::jacobian(const Eigen::VectorXd& cur, double dt,
                                   double nu, double mu) const {
  std::vector<double> values(col_idx_.size());
  const double idt = 1.0 / dt;
  for (std::size_t e = 0; e < values.size(); ++e)
    values[e] = idt * Dv_[e] + nu * Av_[e] + mu * B0v_[e];
  scatter_cells(trilinear_jacobian_cells(cur), values);
  return make_operator(values);
}

}  // namespace qg
