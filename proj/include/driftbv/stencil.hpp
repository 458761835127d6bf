#pragma once

#include <array>
#include <vector>

#include "driftbv/grid.hpp"

namespace driftbv {

// Sparse operator with the fixed 3/5-point box stencil. off[d][c] multiplies
// the neighbor of c in direction d (0:W, 1:E, 2:S, 3:N); missing neighbors
// have coefficient 0.
struct StencilMatrix {
  const Grid* grid = nullptr;
  std::vector<double> diag;
  std::array<std::vector<double>, 4> off;

  void init(const Grid& g) {
    grid = &g;
    diag.assign(g.cell_count(), 0.0);
    const int ndir = g.dim == 1 ? 2 : 4;
    for (int d = 0; d < 4; ++d) off[d].assign(d < ndir ? g.cell_count() : 0, 0.0);
  }

  int neighbor(int c, int d) const {
    const int nx = grid->n[0], ny = grid->n[1];
    const int i = c % nx, j = c / nx;
    switch (d) {
      case 0: return i > 0 ? c - 1 : -1;
      case 1: return i < nx - 1 ? c + 1 : -1;
      case 2: return j > 0 ? c - nx : -1;
      case 3: return j < ny - 1 ? c + nx : -1;
    }
    return -1;
  }

  void matvec(const std::vector<double>& x, std::vector<double>& y) const;
  bool empty() const;  // all coefficients exactly zero
};

struct LinearSolveResult {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Direct tridiagonal elimination (1D stencils).
LinearSolveResult solve_tridiagonal(const StencilMatrix& m, const std::vector<double>& rhs,
                                    std::vector<double>& x);

// Jacobi-preconditioned CG; the operator must be symmetric.
LinearSolveResult solve_cg(const StencilMatrix& m, const std::vector<double>& rhs,
                           std::vector<double>& x, double rel_tol, int max_iter);

// Jacobi-preconditioned BiCGStab for the nonsymmetric upwind operators.
LinearSolveResult solve_bicgstab(const StencilMatrix& m, const std::vector<double>& rhs,
                                 std::vector<double>& x, double rel_tol, int max_iter);

// Dispatch: direct in 1D; in 2D CG when symmetric, BiCGStab otherwise.
LinearSolveResult solve_linear(const StencilMatrix& m, const std::vector<double>& rhs,
                               std::vector<double>& x, double rel_tol, int max_iter,
                               bool symmetric);

}  // namespace driftbv
