#pragma once

#include <array>
#include <vector>

namespace qg {

// Uniform rectangular grid on [x0,x1] x [y0,y1] with nx*ny cells.
// Nodes are numbered lexicographically, x fastest:
//   node(i,j) = j*(nx+1) + i,  0 <= i <= nx, 0 <= j <= ny.
// Cell (ci,cj) covers [x0+ci*hx, x0+(ci+1)*hx] x [y0+cj*hy, y0+(cj+1)*hy].
struct RectMesh {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 1, ny = 1;
  double hx = 1.0, hy = 1.0;

  int node_count() const { return (nx + 1) * (ny + 1); }
  int cell_count() const { return nx * ny; }

  int node_id(int i, int j) const { return j * (nx + 1) + i; }
  double node_x(int i) const { return x0 + i * hx; }
  double node_y(int j) const { return y0 + j * hy; }

  bool boundary_node(int i, int j) const {
    return i == 0 || i == nx || j == 0 || j == ny;
  }

  // Corner nodes of cell (ci,cj) in local order (0,0),(1,0),(0,1),(1,1).
  std::array<int, 4> cell_nodes(int ci, int cj) const {
    const int n00 = node_id(ci, cj);
    return {n00, n00 + 1, n00 + (nx + 1), n00 + (nx + 1) + 1};
  }
};

RectMesh build_mesh(double x0, double x1, double y0, double y1, int nx, int ny);

// Four Hermite unknowns per node: value, d/dx, d/dy, d2/dxdy.
inline constexpr int kDofsPerNode = 4;

// Map (node, component) -> contiguous free index, or kConstrained for the
// clamped boundary. All four components are eliminated at boundary nodes,
// which pins both the value and the normal derivative of the global field.
struct DofMap {
  static constexpr int kConstrained = -1;

  std::vector<int> index;  // kDofsPerNode * node_count entries
  int n_free = 0;

  int operator()(int node, int comp) const {
    return index[node * kDofsPerNode + comp];
  }
};

DofMap build_dofmap(const RectMesh& mesh);

}  // namespace qg
