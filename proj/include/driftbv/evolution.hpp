#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftbv/fields.hpp"
#include "driftbv/graphs.hpp"
#include "driftbv/grid.hpp"
#include "driftbv/stationary.hpp"

namespace driftbv {

// One evolution run: u_{i+1} - eps*Lap p_{i+1} + eps*div(u_{i+1} V_i) = u_i + eps*f_i,
// each step a stationary solve with lambda = eps and rhs u_i + eps*f_i.
struct EvolutionConfig {
  Grid grid;
  MonotoneGraph graph;
  double delta = 0.0;        // <= 0 selects the default delta = eps
  DriftField drift;
  ScalarField source;
  ScalarField initial;
  double T = 1.0;
  double eps_requested = 0.1;
  SolverOptions solver;
  int snapshot_stride = 0;   // 0 = auto: every step while n <= 512, else strided
  bool audit_per_step = true;
  bool bv_guard = false;     // enforce eps < lambda1 per step

  // filled by finalize(): eps divides T exactly, adjusted downward
  double eps = 0.0;
  int n_steps = 0;
  bool eps_adjusted = false;
  double delta_used = 0.0;
  std::vector<double> u0;

  void finalize();
};

struct StepLedgerEntry {
  int step = 0;     // 1-based; the step produced u_step at t = step*eps
  double t = 0.0;
  double residual = 0.0;
  int newton_iters = 0;
  int linear_iters = 0;
  bool fallback = false;
  double mass = 0.0, l1 = 0.0, l2 = 0.0, linf = 0.0;
  double div_neg = 0.0;   // per-interval ||(div V_i)^-||_inf (both discrete views)
  double lambda_v = 0.0;  // per-interval sum_{i,k} sup |d_i V_k|
  double f_l1 = 0.0, f_l2 = 0.0, f_linf = 0.0;  // ||f_i||_q for the eps-level bound
  // energy ledger pieces: int j(u_i), eps*||grad p_i||^2, eps*int f_i p_i,
  // eps*int (div V_i)^- p_i u_i, int j(u_{i-1})
  double j_int = 0.0, eps_grad_p_sq = 0.0, eps_f_p = 0.0, eps_divneg_pu = 0.0, j_prev = 0.0;
  bool energy_ok = true;
  std::vector<EstimateAudit> audits;
};

struct EvolutionRun {
  EvolutionConfig cfg;
  bool failed = false;
  int failed_step = -1;
  std::string failure;

  std::vector<int> snap_steps;  // snapshot at step index (0 = initial datum)
  std::vector<double> snap_times;
  std::vector<std::vector<double>> u_snaps;
  std::vector<std::vector<double>> p_snaps;
  std::vector<StepLedgerEntry> ledger;
  bool j0_finite = true;
  double j0 = 0.0;

  const std::vector<double>& final_u() const { return u_snaps.back(); }
  const std::vector<double>& final_p() const { return p_snaps.back(); }
  // snapshot position for step i, or -1 when strided out
  int snapshot_of_step(int step) const;
  bool per_step_snapshots() const { return (int)u_snaps.size() == cfg.n_steps + 1; }
};

struct StepResult {
  std::vector<double> u;
  std::vector<double> p;
  StepLedgerEntry entry;
};

// One implicit Euler step from u_prev over [i*eps, (i+1)*eps).
StepResult euler_step(const std::vector<double>& u_prev, double j_prev, int i,
                      const EvolutionConfig& cfg);

// Marches all steps; a failing step aborts and leaves the partial run (with
// `failed` set) for post-mortem inspection.
EvolutionRun run(const EvolutionConfig& cfg);

enum class InterpKind { PiecewiseConstant, Linear };

// u_eps / tilde-u_eps evaluated at time t in [0, T).
std::vector<double> interpolant_eval(const EvolutionRun& run, double t, InterpKind which);

// Continuum Gronwall bound M_q(t) for the evolution problem, in its two-line
// form: exponent coefficient (q-1) for q < infinity and 1 for q = infinity;
// time integrals by per-step Gauss quadrature.
double mq_bound(const EvolutionRun& run, double q, double t);

// eps-level bound M_q^eps(t_i) built from the averaged data f_i and the
// per-interval divergence constants (same two-line exponent convention).
double mq_eps_bound(const EvolutionRun& run, double q, int step);

// Sharper product-form bound Prod (1 - (q-1) eps d_i)^{-1} (...) that the
// implicit upwind scheme satisfies step by step; reported alongside.
double mq_eps_product_bound(const EvolutionRun& run, double q, int step);

struct DeltaStudyRow {
  double delta_coarse = 0.0;
  double delta_fine = 0.0;
  double u_dist = 0.0;  // L2(Q) distance between the two runs
  double p_dist = 0.0;  // discrete L2(0,T;H1) seminorm distance
};

// Repeats the run over a decreasing delta list and reports neighbor distances.
std::vector<DeltaStudyRow> delta_refinement_study(const EvolutionConfig& base,
                                                  const std::vector<double>& deltas,
                                                  bool* monotone = nullptr);

}  // namespace driftbv
