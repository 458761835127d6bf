#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftbv/cutoff.hpp"
#include "driftbv/evolution.hpp"
#include "driftbv/fields.hpp"
#include "driftbv/grid.hpp"
#include "driftbv/stationary.hpp"

namespace driftbv {

// Volume-weighted L^q norm (max norm for q = infinity), optionally restricted
// to a cell mask.
double lq_norm(const std::vector<double>& field, const Grid& grid, double q,
               const std::vector<char>* region = nullptr);

// Discrete directional total variation: sum over interior faces orthogonal to
// e_axis of |jump| * face measure, the exact TV of the piecewise-constant
// interpolant. The optional nonnegative weight is face-averaged.
double directional_tv(const std::vector<double>& field, const Grid& grid, int axis,
                      const std::vector<double>* weight = nullptr);

enum class AuditStatus { Pass, PassWithSlack, Fail };
std::string audit_status_name(AuditStatus s);

struct BVAuditRecord {
  double t = 0.0;
  double lhs = 0.0;       // sum_j weighted TV_j of the audited field
  double lhs_factor = 1.0;  // stationary: (1 - lambda*lambda_V); evolution: 1
  double grad_p_term = 0.0;
  double grad_div_term = 0.0;
  double source_tv_term = 0.0;
  double initial_tv_term = 0.0;
  double gronwall_factor = 1.0;  // e^{lambda_V T} (evolution) or 1
  double rhs = 0.0;
  double ratio = 0.0;
  AuditStatus status = AuditStatus::Pass;
  double discrete_slack = 0.0;  // ratio - 1 when positive
};

// Stationary BV estimate audit. Refuses (CutoffRejected) when the cutoff sign
// hypothesis fails for the problem's drift; requires lambda < lambda1.
BVAuditRecord verify_bv_stationary(const StationarySolution& sol,
                                   const StationaryProblem& problem, const Cutoff& cutoff,
                                   double slack_ceiling = 0.05);

// Evolution BV audit per snapshot: weighted TV of u_eps(t) against the
// Gronwall bound with all four right-hand-side terms accumulated over steps.
std::vector<BVAuditRecord> verify_bv_evolution(const EvolutionRun& run, const Cutoff& cutoff,
                                               double slack_ceiling = 0.05);

// Transport oracle u(t,x) = u0(X_{-t}(x)) by backward RK4 characteristics
// (fixed step t/200); trajectories that exit the domain carry the value 0.
// Requires a divergence-free field (tolerance 1e-10 on the analytic or
// sampled divergence).
std::vector<double> characteristics_oracle(const DriftField& field, const ScalarField& u0,
                                           double t, const Grid& grid);

struct MqCurvePoint {
  double t = 0.0;
  double norm_l1 = 0.0, norm_l2 = 0.0, norm_linf = 0.0;
  double bound_l1 = 0.0, bound_l2 = 0.0, bound_linf = 0.0;
};

struct EnergyBudgetRow {
  double t = 0.0;
  double lhs = 0.0;  // (J_i - J_{i-1})/eps + 1/2 ||grad p_i||^2
  double rhs = 0.0;  // C_P^2 (||f_i||_2^2 + d_i^2 M_2^eps(t_i)^2)
  bool ok = true;
};

struct TvSeriesRow {
  double t = 0.0;
  std::array<double, 2> tv_plain{0.0, 0.0};
  std::array<double, 2> tv_weighted{0.0, 0.0};
};

struct DiagnosticsReport {
  int audits_total = 0;
  int audits_passed = 0;
  int audits_slack = 0;
  int audits_failed = 0;
  double worst_ratio = 0.0;
  double lambda0 = 0.0, lambda1 = 0.0, lambda_v = 0.0;
  bool energy_ledger_ok = true;
  bool energy_budget_available = false;  // needs a Dirichlet wall (Poincare)
  double poincare_constant = 0.0;
  std::vector<MqCurvePoint> mq_curve;
  std::vector<EnergyBudgetRow> energy_budget;
  std::vector<TvSeriesRow> tv_series;
  std::vector<BVAuditRecord> bv_audits;
  std::vector<std::pair<double, EstimateAudit>> estimate_audits;  // (t, audit)
};

// Aggregates the run ledger, the per-step estimate audits and any BV audits
// into one machine-writable summary.
DiagnosticsReport build_report(const EvolutionRun& run,
                               const std::vector<BVAuditRecord>& bv_audits,
                               const Cutoff* cutoff = nullptr);

}  // namespace driftbv
