#pragma once

#include <string>
#include <vector>

#include "driftbv/fields.hpp"
#include "driftbv/graphs.hpp"
#include "driftbv/grid.hpp"
#include "driftbv/stencil.hpp"

namespace driftbv {

struct SolverOptions {
  double newton_tol = 1e-10;      // relative on ||F||_2 / ||M f||_2
  double newton_abs_floor = 1e-13;
  int max_newton = 80;
  double linear_tol = 1e-12;
  int max_linear = 40000;
  double damping_min = 9.5367431640625e-7;  // 2^-20
  int max_picard = 500;
  // relative floor on the Jacobian slope: keeps degenerate branches
  // (beta' = 0) from zeroing rows; the floor is slope_floor_rel / delta
  double slope_floor_rel = 1e-7;
};

// Cell-centered finite-volume operators for the stationary problem
//   v - lambda*div(grad p) + lambda*div(v V) = f,  v = beta_delta(p).
// A is the (volume-integrated) stiffness of -Laplace with p = 0 imposed at
// Dirichlet faces through half-cell fluxes and natural zero flux on Neumann
// faces. D applies the first-order upwind drift divergence to v; Neumann
// faces carry no advective flux, Dirichlet outflow faces take the interior
// upwind value and Dirichlet inflow faces the exterior value 0.
struct DiscreteOperators {
  StencilMatrix A;
  StencilMatrix D;
  bool drift_present = false;
};

DiscreteOperators assemble(const Grid& grid, const AveragedSample& v_sample, double lambda);

struct StationaryProblem {
  const Grid* grid = nullptr;
  double lambda = 0.0;
  RegularizedGraph graph;
  const AveragedSample* drift = nullptr;
  std::vector<double> f;
  SolverOptions opts;
  bool bv_guard = false;  // additionally require lambda < lambda1

  // Throws StepTooLarge unless lambda < lambda0 (and < lambda1 when the BV
  // guard is on).
  StationaryProblem(const Grid& g, double lam, RegularizedGraph rg, const AveragedSample& vs,
                    std::vector<double> rhs, SolverOptions o = {}, bool bv = false);
};

struct StationarySolution {
  std::vector<double> p;
  std::vector<double> v;
  double residual = 0.0;
  int newton_iters = 0;
  int linear_iters = 0;
  bool converged = false;
  bool fallback_used = false;
};

// Damped Newton on F(p) = M beta(p) + lambda A p + lambda D beta(p) - M f with
// the analytic Jacobian; falls back to a frozen-slope (Lipschitz bound)
// iteration when the line search stagnates.
StationarySolution solve_stationary(const StationaryProblem& problem);

// TransportZero mode: p == 0 and (M + lambda D) v = M f, an M-matrix solve.
StationarySolution solve_transport_step(const StationaryProblem& problem);

enum class EstimateKind { Lq, Lmst, KContraction, KContractionMinus, Linfty, Positivity };

struct EstimateId {
  EstimateKind kind = EstimateKind::Lq;
  double q = 2.0;  // Lq only; infinity() selects the L^inf line
  double k = 0.0;  // k-contraction threshold
};

EstimateId parse_estimate_id(const std::string& text);
std::string estimate_name(const EstimateId& id);

struct EstimateAudit {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

// Audits one stationary a-priori inequality on a converged solution using
// volume-weighted discrete norms; the divergence constant is the measured
// sup of the negative part over both discrete divergence views.
EstimateAudit verify_stationary_estimate(const StationarySolution& sol,
                                         const StationaryProblem& problem,
                                         const EstimateId& which);

// Discrete H1 seminorm ||grad p||^2 = p.A.p used by the energy estimates.
double grad_norm_sq(const DiscreteOperators& ops, const std::vector<double>& p);

}  // namespace driftbv
