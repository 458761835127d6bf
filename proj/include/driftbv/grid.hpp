#pragma once

#include <array>
#include <string>
#include <vector>

#include "driftbv/errors.hpp"

namespace driftbv {

enum class BcKind { Dirichlet, Neumann };

// One label per boundary face of the box: [axis][side], side 0 = low wall,
// side 1 = high wall. Gamma_D and Gamma_N partition the boundary.
struct BoundaryPartition {
  std::array<std::array<BcKind, 2>, 2> label{};

  bool has_dirichlet(int dim) const {
    for (int a = 0; a < dim; ++a)
      for (int s = 0; s < 2; ++s)
        if (label[a][s] == BcKind::Dirichlet) return true;
    return false;
  }
  // Estimates that need a Poincare constant are skipped when Gamma_D is empty.
  bool poincare_unavailable(int dim) const { return !has_dirichlet(dim); }
};

// Uniform cell-centered box mesh in 1 or 2 dimensions. Cells are indexed
// c = i + n[0]*j; in 1D the y machinery collapses (n[1] = 1, h[1] = 1).
struct Grid {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<int, 2> n{1, 1};
  std::array<double, 2> h{1.0, 1.0};
  BoundaryPartition bc;

  int cell_count() const { return n[0] * n[1]; }
  int index(int i, int j = 0) const { return i + n[0] * j; }
  int ci(int c) const { return c % n[0]; }
  int cj(int c) const { return c / n[0]; }
  double coord(int axis, int k) const { return lo[axis] + (k + 0.5) * h[axis]; }
  std::array<double, 2> center(int c) const {
    return {coord(0, ci(c)), dim == 2 ? coord(1, cj(c)) : 0.0};
  }
  double cell_volume() const { return dim == 1 ? h[0] : h[0] * h[1]; }
  // Measure of a face orthogonal to `axis` (1 in 1D, transverse spacing in 2D).
  double face_area(int axis) const {
    if (dim == 1) return 1.0;
    return h[1 - axis];
  }
  double width(int axis) const { return hi[axis] - lo[axis]; }

  bool same_layout(const Grid& o) const {
    return dim == o.dim && n == o.n && lo == o.lo && hi == o.hi;
  }
};

// Boundary selectors accepted in configs: "left"/"right" (x walls),
// "bottom"/"top" (y walls), or "all".
Grid build_grid(int dim, const std::array<double, 2>& lo, const std::array<double, 2>& hi,
                const std::array<int, 2>& cells, const std::vector<std::string>& dirichlet,
                const std::vector<std::string>& neumann);

// Exact box distance d(x, Gamma) sampled at cell centers.
std::vector<double> distance_to_boundary(const Grid& grid);

// Wall achieving the distance minimum per cell; the outward normal at the
// projection point pi(x) is sign * e_axis.
struct WallProjection {
  int axis;
  int side;  // 0 = low wall (normal -e_axis), 1 = high wall (normal +e_axis)
};
std::vector<WallProjection> boundary_projection(const Grid& grid);

}  // namespace driftbv
