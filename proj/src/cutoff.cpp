#include "driftbv/cutoff.hpp"

#include <cmath>

namespace driftbv {

EtaProfile build_eta(double h, double c1, double c2) {
  if (!(h > 0)) throw BadEtaConstants("eta: h must be positive");
  if (!(0 < c1 && c1 < c2 && c2 < 1)) throw BadEtaConstants("eta: need 0 < c1 < c2 < 1");
  if (std::fabs(2 * c2 * c2 - c1 * c1 - 1.0) > 1e-12)
    throw BadEtaConstants("eta: constants violate 2*c2^2 - c1^2 = 1");
  EtaProfile p;
  p.h = h;
  p.c1 = c1;
  p.c2 = c2;
  p.M_h = (c2 * c2 - c1 * c1) * h * h;
  p.C_h = p.M_h * std::log(2.0);
  return p;
}

std::pair<double, double> eta_eval(const EtaProfile& p, double r) {
  if (!(r >= 0) || !std::isfinite(r)) throw InvalidInput("eta_eval: r must be finite, >= 0");
  const double h = p.h, c1h = p.c1 * p.h, c2h = p.c2 * p.h;
  if (r <= c1h) return {0.0, 0.0};
  if (r >= h) return {1.0, 0.0};
  if (r <= c2h) {
    const double q = r * r - c1h * c1h;
    const double v = std::exp(-p.C_h / q);
    return {v, 2.0 * r * p.C_h / (q * q) * v};
  }
  const double q = h * h - r * r;
  const double e = std::exp(-p.C_h / q);
  return {1.0 - e, 2.0 * r * p.C_h / (q * q) * e};
}

Cutoff build_cutoff(const Grid& grid, const EtaProfile& eta) {
  double half_width = grid.width(0) / 2.0;
  if (grid.dim == 2) half_width = std::min(half_width, grid.width(1) / 2.0);
  if (!(eta.h < 0.5 * half_width))
    throw CutoffDoesNotFit("cutoff: h must be below half the minimal box half-width");
  // The zero region must cover the boundary ring of cells, otherwise the
  // zero-extended discrete Laplacian would see a truncated profile.
  for (int a = 0; a < grid.dim; ++a)
    if (!(eta.c1 * eta.h > 0.5 * grid.h[a]))
      throw CutoffDoesNotFit("cutoff: shell thinner than one cell, refine the grid or grow h");

  Cutoff cut;
  cut.grid = grid;
  cut.eta = eta;
  const int nc = grid.cell_count();
  const auto dist = distance_to_boundary(grid);
  cut.omega.resize(nc);
  cut.shell.assign(nc, 0);
  cut.interior_region.assign(nc, 0);
  for (int c = 0; c < nc; ++c) {
    cut.omega[c] = eta_eval(eta, dist[c]).first;
    cut.shell[c] = dist[c] <= eta.h ? 1 : 0;
    cut.interior_region[c] = dist[c] > eta.h ? 1 : 0;
  }
  // discrete Laplacian, neighbors outside the box read 0 (exact: omega
  // vanishes on the boundary ring)
  cut.laplacian.assign(nc, 0.0);
  const int nx = grid.n[0], ny = grid.n[1];
  auto at = [&](int i, int j) -> double {
    if (i < 0 || i >= nx || j < 0 || j >= ny) return 0.0;
    return cut.omega[grid.index(i, j)];
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = grid.index(i, j);
      double lap = (at(i - 1, j) - 2.0 * cut.omega[c] + at(i + 1, j)) / (grid.h[0] * grid.h[0]);
      if (grid.dim == 2)
        lap += (at(i, j - 1) - 2.0 * cut.omega[c] + at(i, j + 1)) / (grid.h[1] * grid.h[1]);
      cut.laplacian[c] = lap;
    }
  return cut;
}

CutoffSignCheck check_cutoff_sign(const Cutoff& cut,
                                  const std::array<std::vector<double>, 2>& v_cell,
                                  const std::vector<double>& phi) {
  const Grid& g = cut.grid;
  const int nc = g.cell_count();
  if ((int)phi.size() != nc || (int)v_cell[0].size() != nc ||
      (g.dim == 2 && (int)v_cell[1].size() != nc))
    throw GridMismatch("check_cutoff_sign: fields not sampled on the cutoff grid");

  const int nx = g.n[0], ny = g.n[1];
  auto om = [&](int i, int j) -> double {
    if (i < 0 || i >= nx || j < 0 || j >= ny) return 0.0;
    return cut.omega[g.index(i, j)];
  };
  CutoffSignCheck r;
  const double vol = g.cell_volume();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = g.index(i, j);
      if (!cut.shell[c]) continue;
      double vdg = v_cell[0][c] * (om(i + 1, j) - om(i - 1, j)) / (2.0 * g.h[0]);
      if (g.dim == 2) vdg += v_cell[1][c] * (om(i, j + 1) - om(i, j - 1)) / (2.0 * g.h[1]);
      r.integral += phi[c] * vdg * vol;
      if (vdg > 0) r.positive_part += phi[c] * vdg * vol;
      if (r.worst_cell < 0 || vdg > r.worst_value) {
        r.worst_cell = c;
        r.worst_value = vdg;
      }
    }
  r.pass = r.positive_part <= 1e-10;
  return r;
}

}  // namespace driftbv
