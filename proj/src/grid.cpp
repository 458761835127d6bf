#include "driftbv/grid.hpp"

#include <algorithm>
#include <cmath>

namespace driftbv {

namespace {

// face key: axis*2 + side
int face_key_from_name(const std::string& name, int dim) {
  if (name == "left") return 0;
  if (name == "right") return 1;
  if (dim == 2) {
    if (name == "bottom") return 2;
    if (name == "top") return 3;
  }
  throw BadBoundarySpec("unknown boundary selector '" + name + "' for dim " +
                        std::to_string(dim));
}

}  // namespace

Grid build_grid(int dim, const std::array<double, 2>& lo, const std::array<double, 2>& hi,
                const std::array<int, 2>& cells, const std::vector<std::string>& dirichlet,
                const std::vector<std::string>& neumann) {
  if (dim != 1 && dim != 2) throw BadBoundarySpec("grid dim must be 1 or 2");
  Grid g;
  g.dim = dim;
  g.lo = lo;
  g.hi = hi;
  g.n = cells;
  if (dim == 1) {
    g.n[1] = 1;
    g.lo[1] = 0.0;
    g.hi[1] = 1.0;
  }
  for (int a = 0; a < dim; ++a) {
    if (!(g.hi[a] > g.lo[a])) throw BadBoundarySpec("grid extents must be increasing");
    if (g.n[a] < 4) throw BadBoundarySpec("grid needs at least 4 cells per axis");
    g.h[a] = (g.hi[a] - g.lo[a]) / g.n[a];
  }
  if (dim == 1) g.h[1] = 1.0;

  const int nfaces = 2 * dim;
  std::array<int, 4> seen{};  // 0 unset, 1 Dirichlet, 2 Neumann
  auto apply = [&](const std::vector<std::string>& names, int tag) {
    for (const auto& name : names) {
      if (name == "all") {
        for (int k = 0; k < nfaces; ++k) {
          if (seen[k] != 0 && seen[k] != tag)
            throw BadBoundarySpec("boundary face labeled twice with different labels");
          seen[k] = tag;
        }
        continue;
      }
      const int k = face_key_from_name(name, dim);
      if (seen[k] != 0 && seen[k] != tag)
        throw BadBoundarySpec("boundary face '" + name + "' labeled twice");
      seen[k] = tag;
    }
  };
  apply(dirichlet, 1);
  apply(neumann, 2);
  for (int k = 0; k < nfaces; ++k) {
    if (seen[k] == 0) throw BadBoundarySpec("boundary face left unlabeled");
    g.bc.label[k / 2][k % 2] = (seen[k] == 1) ? BcKind::Dirichlet : BcKind::Neumann;
  }
  return g;
}

std::vector<double> distance_to_boundary(const Grid& grid) {
  std::vector<double> d(grid.cell_count());
  for (int c = 0; c < grid.cell_count(); ++c) {
    const auto x = grid.center(c);
    double best = std::min(x[0] - grid.lo[0], grid.hi[0] - x[0]);
    if (grid.dim == 2) best = std::min({best, x[1] - grid.lo[1], grid.hi[1] - x[1]});
    d[c] = best;
  }
  return d;
}

std::vector<WallProjection> boundary_projection(const Grid& grid) {
  std::vector<WallProjection> pr(grid.cell_count());
  for (int c = 0; c < grid.cell_count(); ++c) {
    const auto x = grid.center(c);
    double best = x[0] - grid.lo[0];
    WallProjection w{0, 0};
    if (grid.hi[0] - x[0] < best) {
      best = grid.hi[0] - x[0];
      w = {0, 1};
    }
    if (grid.dim == 2) {
      if (x[1] - grid.lo[1] < best) {
        best = x[1] - grid.lo[1];
        w = {1, 0};
      }
      if (grid.hi[1] - x[1] < best) {
        best = grid.hi[1] - x[1];
        w = {1, 1};
      }
    }
    pr[c] = w;
  }
  return pr;
}

}  // namespace driftbv
