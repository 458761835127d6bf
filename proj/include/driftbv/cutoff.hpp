#pragma once

#include <utility>
#include <vector>

#include "driftbv/grid.hpp"

namespace driftbv {

// Radial profile eta_h for the interior cutoff omega_h = eta_h(d(.,Gamma)).
// Four branches: 0 below c1*h, exponential ramp in [c1*h, c2*h], mirrored ramp
// in [c2*h, h], 1 beyond h, glued with 2*c2^2 - c1^2 = 1 and C_h = M_h*ln 2 so
// that both ramps meet at value 1/2.
struct EtaProfile {
  double h = 0.1;
  double c1 = 0.5;
  double c2 = 0.7905694150420949;  // sqrt(5)/(2*sqrt(2))
  double C_h = 0.0;
  double M_h = 0.0;
};

EtaProfile build_eta(double h, double c1 = 0.5, double c2 = 0.7905694150420949);

// Returns (eta_h(r), eta_h'(r)). eta is nondecreasing, continuous, with value
// exactly 1/2 at r = c2*h; the derivative may jump there.
std::pair<double, double> eta_eval(const EtaProfile& profile, double r);

// omega_h sampled at cell centers together with its discrete Laplacian and the
// interior-shell masks. omega == 1 on Omega_h = {d > h}, == 0 for d <= c1*h.
struct Cutoff {
  Grid grid;
  EtaProfile eta;
  std::vector<double> omega;
  std::vector<double> laplacian;      // standard 2nd-order stencil of omega
  std::vector<char> shell;            // Omega \ Omega_h: d <= h
  std::vector<char> interior_region;  // Omega_h: d > h

  double laplacian_pos(int c) const { return laplacian[c] > 0 ? laplacian[c] : 0.0; }
};

Cutoff build_cutoff(const Grid& grid, const EtaProfile& eta);

// Quadrature check of the support hypothesis int_{Omega \ Omega_h} phi V.grad(omega) <= 0.
// The hypothesis quantifies over every nonnegative phi, so the verdict is on
// the positive-part integral (the worst admissible redistribution of the given
// phi); the signed integral is reported alongside.
struct CutoffSignCheck {
  double integral = 0.0;       // signed quadrature value with the given phi
  double positive_part = 0.0;  // int phi (V.grad omega)^+
  bool pass = true;
  int worst_cell = -1;  // cell maximizing V.grad(omega) over the shell
  double worst_value = 0.0;
};

CutoffSignCheck check_cutoff_sign(const Cutoff& cutoff,
                                  const std::array<std::vector<double>, 2>& v_cell,
                                  const std::vector<double>& phi);

}  // namespace driftbv
