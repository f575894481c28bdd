#include "qgfem/mesh.hpp"

#include <cmath>
#include <string>

#include "qgfem/common.hpp"

namespace qg {

RectMesh build_mesh(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (!(x1 > x0) || !(y1 > y0))
    throw ConfigError("build_mesh: domain is degenerate: [" + std::to_string(x0) +
                      "," + std::to_string(x1) + "] x [" + std::to_string(y0) +
                      "," + std::to_string(y1) + "]");
  if (nx < 2 || ny < 2)
    throw ConfigError("build_mesh: need at least 2 cells per direction so the "
                      "clamped space is nonempty, got nx=" + std::to_string(nx) +
                      " ny=" + std::to_string(ny));
  RectMesh m;
  m.x0 = x0; m.x1 = x1; m.y0 = y0; m.y1 = y1;
  m.nx = nx; m.ny = ny;
  m.hx = (x1 - x0) / nx;
  m.hy = (y1 - y0) / ny;
  return m;
}

DofMap build_dofmap(const RectMesh& mesh) {
  DofMap dm;
  dm.index.assign(static_cast<std::size_t>(kDofsPerNode) * mesh.node_count(),
                  DofMap::kConstrained);
  int next = 0;
  for (int j = 0; j <= mesh.ny; ++j)
    for (int i = 0; i <= mesh.nx; ++i) {
      if (mesh.boundary_node(i, j)) continue;
      const int node = mesh.node_id(i, j);
      for (int c = 0; c < kDofsPerNode; ++c)
        dm.index[node * kDofsPerNode + c] = next++;
    }
  dm.n_free = next;
  return dm;
}

}  // namespace qg
