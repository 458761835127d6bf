#include "driftbv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace driftbv {

namespace {

constexpr double kPi = 3.14159265358979323846;

AuditStatus classify(double lhs, double rhs, double slack_ceiling, double* ratio,
                     double* slack) {
  const double tol = 1e-12;
  *ratio = rhs > tol ? lhs / rhs : (lhs <= tol ? 0.0 : std::numeric_limits<double>::infinity());
  *slack = std::max(0.0, *ratio - 1.0);
  if (lhs <= rhs * (1.0 + 1e-6) + tol) return AuditStatus::Pass;
  if (lhs <= rhs * (1.0 + slack_ceiling) + tol) return AuditStatus::PassWithSlack;
  return AuditStatus::Fail;
}

// sum over faces orthogonal to `axis` of (Delta omega)^+ |p jump| * face area
double grad_p_weighted(const std::vector<double>& p, const Grid& g, int axis,
                       const Cutoff& cut) {
  const int nx = g.n[0], ny = g.n[1];
  const double area = g.face_area(axis);
  double s = 0.0;
  const int ilim = axis == 0 ? nx - 1 : nx;
  const int jlim = axis == 0 ? ny : ny - 1;
  for (int j = 0; j < jlim; ++j)
    for (int i = 0; i < ilim; ++i) {
      const int c = g.index(i, j);
      const int nb = axis == 0 ? g.index(i + 1, j) : g.index(i, j + 1);
      const double w = 0.5 * (cut.laplacian_pos(c) + cut.laplacian_pos(nb));
      s += w * std::fabs(p[nb] - p[c]) * area;
    }
  return s;
}

}  // namespace

std::string audit_status_name(AuditStatus s) {
  switch (s) {
    case AuditStatus::Pass: return "pass";
    case AuditStatus::PassWithSlack: return "pass_with_slack";
    case AuditStatus::Fail: return "fail";
  }
  return "?";
}

double lq_norm(const std::vector<double>& field, const Grid& grid, double q,
               const std::vector<char>* region) {
  if (!(q >= 1.0)) throw InvalidInput("lq_norm: q must be >= 1");
  if ((int)field.size() != grid.cell_count())
    throw GridMismatch("lq_norm: field not sampled on the grid");
  const double vol = grid.cell_volume();
  if (std::isinf(q)) {
    double m = 0.0;
    for (int c = 0; c < grid.cell_count(); ++c) {
      if (region && !(*region)[c]) continue;
      m = std::max(m, std::fabs(field[c]));
    }
    return m;
  }
  double s = 0.0;
  for (int c = 0; c < grid.cell_count(); ++c) {
    if (region && !(*region)[c]) continue;
    s += std::pow(std::fabs(field[c]), q) * vol;
  }
  return std::pow(s, 1.0 / q);
}

double directional_tv(const std::vector<double>& field, const Grid& grid, int axis,
                      const std::vector<double>* weight) {
  if ((int)field.size() != grid.cell_count())
    throw GridMismatch("directional_tv: field not sampled on the grid");
  if (weight && (int)weight->size() != grid.cell_count())
    throw GridMismatch("directional_tv: weight not sampled on the grid");
  if (axis < 0 || axis >= grid.dim) throw InvalidInput("directional_tv: bad axis");
  if (weight)
    for (double w : *weight)
      if (w < 0) throw InvalidInput("directional_tv: weight must be nonnegative");

  const int nx = grid.n[0], ny = grid.n[1];
  const double area = grid.face_area(axis);
  double s = 0.0;
  const int ilim = axis == 0 ? nx - 1 : nx;
  const int jlim = axis == 0 ? ny : ny - 1;
  for (int j = 0; j < jlim; ++j)
    for (int i = 0; i < ilim; ++i) {
      const int c = grid.index(i, j);
      const int nb = axis == 0 ? grid.index(i + 1, j) : grid.index(i, j + 1);
      double w = 1.0;
      if (weight) w = 0.5 * ((*weight)[c] + (*weight)[nb]);
      s += w * std::fabs(field[nb] - field[c]) * area;
    }
  return s;
}

BVAuditRecord verify_bv_stationary(const StationarySolution& sol,
                                   const StationaryProblem& pb, const Cutoff& cutoff,
                                   double slack_ceiling) {
  const Grid& g = *pb.grid;
  if (!cutoff.grid.same_layout(g)) throw GridMismatch("verify_bv_stationary: cutoff grid differs");
  const double lam = pb.lambda;
  const double lambda_v = pb.drift->lambda_v;
  if (!(lam < pb.drift->lambda1()))
    throw StepTooLarge("verify_bv_stationary: lambda >= lambda1");

  // hypothesis (support condition): V.grad(omega) <= 0 against every
  // nonnegative phi; checked per cell over the shell
  CutoffSignCheck sign = check_cutoff_sign(cutoff, pb.drift->cell_vec,
                                           std::vector<double>(g.cell_count(), 1.0));
  if (sign.worst_value > 1e-10 || !sign.pass)
    throw CutoffRejected("verify_bv_stationary: cutoff support hypothesis fails (worst cell " +
                         std::to_string(sign.worst_cell) + ")");

  BVAuditRecord rec;
  rec.lhs_factor = 1.0 - lam * lambda_v;
  double tv = 0.0, gp = 0.0, gd = 0.0, ftv = 0.0;
  const double vol = g.cell_volume();
  for (int axis = 0; axis < g.dim; ++axis) {
    tv += directional_tv(sol.v, g, axis, &cutoff.omega);
    gp += grad_p_weighted(sol.p, g, axis, cutoff);
    ftv += directional_tv(pb.f, g, axis, &cutoff.omega);
    for (int c = 0; c < g.cell_count(); ++c)
      gd += cutoff.omega[c] * std::fabs(sol.v[c]) * std::fabs(pb.drift->grad_div[axis][c]) * vol;
  }
  rec.lhs = rec.lhs_factor * tv;
  rec.grad_p_term = lam * gp;
  rec.grad_div_term = lam * gd;
  rec.source_tv_term = ftv;
  rec.rhs = rec.grad_p_term + rec.source_tv_term + rec.grad_div_term;
  rec.status = classify(rec.lhs, rec.rhs, slack_ceiling, &rec.ratio, &rec.discrete_slack);
  return rec;
}

std::vector<BVAuditRecord> verify_bv_evolution(const EvolutionRun& run, const Cutoff& cutoff,
                                               double slack_ceiling) {
  const EvolutionConfig& cfg = run.cfg;
  const Grid& g = cfg.grid;
  if (!cutoff.grid.same_layout(g)) throw GridMismatch("verify_bv_evolution: cutoff grid differs");
  if (!run.per_step_snapshots())
    throw InvalidInput("verify_bv_evolution: per-step snapshots required");
  const double eps = cfg.eps;
  const double vol = g.cell_volume();

  double lambda_v = 0.0;
  for (const auto& e : run.ledger) {
    lambda_v = std::max(lambda_v, e.lambda_v);
    if (!(eps * e.lambda_v < 1.0))
      throw StepTooLarge("verify_bv_evolution: eps >= lambda1 at step " +
                         std::to_string(e.step));
  }
  const double gronwall = std::exp(lambda_v * cfg.T);

  double u0_term = 0.0;
  for (int axis = 0; axis < g.dim; ++axis)
    u0_term += directional_tv(cfg.u0, g, axis, &cutoff.omega);

  std::vector<BVAuditRecord> out;
  double gp_acc = 0.0, gd_acc = 0.0, ftv_acc = 0.0;
  const bool v_static = !cfg.drift.time_dependent();
  const bool f_static = !cfg.source.time_dependent();
  AveragedSample vi;
  std::vector<double> fi;
  bool cached = false;
  for (size_t s = 1; s < run.u_snaps.size(); ++s) {
    const int step = run.snap_steps[s];
    const double t0 = (step - 1) * eps, t1 = step * eps;
    const auto& u = run.u_snaps[s];
    const auto& p = run.p_snaps[s];
    if (!cached || !v_static) vi = time_average(cfg.drift, t0, t1, g);
    if (!cached || !f_static) fi = time_average_scalar(cfg.source, t0, t1, g);
    cached = true;

    // cutoff sign hypothesis for this interval's averaged field
    CutoffSignCheck sign =
        check_cutoff_sign(cutoff, vi.cell_vec, std::vector<double>(g.cell_count(), 1.0));
    if (sign.worst_value > 1e-10 || !sign.pass)
      throw CutoffRejected("verify_bv_evolution: cutoff support hypothesis fails at t = " +
                           std::to_string(t1));
    for (int axis = 0; axis < g.dim; ++axis) {
      gp_acc += eps * grad_p_weighted(p, g, axis, cutoff);
      ftv_acc += eps * directional_tv(fi, g, axis, &cutoff.omega);
      for (int c = 0; c < g.cell_count(); ++c)
        gd_acc += eps * cutoff.omega[c] * std::fabs(u[c]) *
                  std::fabs(vi.grad_div[axis][c]) * vol;
    }

    BVAuditRecord rec;
    rec.t = t1;
    rec.gronwall_factor = gronwall;
    double tv = 0.0;
    for (int axis = 0; axis < g.dim; ++axis) tv += directional_tv(u, g, axis, &cutoff.omega);
    rec.lhs = tv;
    rec.grad_p_term = gp_acc;
    rec.grad_div_term = gd_acc;
    rec.source_tv_term = ftv_acc;
    rec.initial_tv_term = u0_term;
    rec.rhs = gronwall * (gp_acc + gd_acc + ftv_acc + u0_term);
    rec.status = classify(rec.lhs, rec.rhs, slack_ceiling, &rec.ratio, &rec.discrete_slack);
    out.push_back(rec);
  }
  return out;
}

std::vector<double> characteristics_oracle(const DriftField& field, const ScalarField& u0,
                                           double t, const Grid& grid) {
  if (!(t >= 0)) throw InvalidInput("characteristics_oracle: t must be >= 0");
  // divergence-free precondition: analytic divergence when the catalog
  // provides one, sampled centered divergence otherwise
  double div_sup = 0.0;
  if (field.has_analytic_divergence()) {
    for (int c = 0; c < grid.cell_count(); ++c)
      div_sup = std::max(div_sup, std::fabs(field.analytic_divergence(0.0, grid.center(c))));
  } else {
    AveragedSample s = time_average(field, 0.0, std::max(t, 1e-6), grid);
    for (double d : s.div_centered) div_sup = std::max(div_sup, std::fabs(d));
  }
  if (div_sup > 1e-10)
    throw OracleInapplicable("characteristics_oracle: field is not divergence free (sup " +
                             std::to_string(div_sup) + ")");

  const int nc = grid.cell_count();
  std::vector<double> out(nc, 0.0);
  if (t == 0.0) {
    for (int c = 0; c < nc; ++c) out[c] = u0.eval(0.0, grid.center(c));
    return out;
  }
  const int nsub = 200;
  const double dt = t / nsub;
  auto inside = [&](const std::array<double, 2>& x) {
    for (int a = 0; a < grid.dim; ++a)
      if (x[a] < grid.lo[a] || x[a] > grid.hi[a]) return false;
    return true;
  };
  auto vel = [&](double tau, const std::array<double, 2>& x) {
    std::array<double, 2> v{field.eval(0, tau, x), 0.0};
    if (grid.dim == 2) v[1] = field.eval(1, tau, x);
    return v;
  };

  for (int c = 0; c < nc; ++c) {
    std::array<double, 2> x = grid.center(c);
    bool exited = false;
    double tau = t;
    for (int s = 0; s < nsub; ++s) {
      // backward characteristic: dx/ds = -V(tau, x)
      const auto k1 = vel(tau, x);
      std::array<double, 2> x2{x[0] - 0.5 * dt * k1[0], x[1] - 0.5 * dt * k1[1]};
      const auto k2 = vel(tau - 0.5 * dt, x2);
      std::array<double, 2> x3{x[0] - 0.5 * dt * k2[0], x[1] - 0.5 * dt * k2[1]};
      const auto k3 = vel(tau - 0.5 * dt, x3);
      std::array<double, 2> x4{x[0] - dt * k3[0], x[1] - dt * k3[1]};
      const auto k4 = vel(tau - dt, x4);
      x[0] -= dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      x[1] -= dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
      tau -= dt;
      if (!inside(x)) {
        exited = true;  // trajectories entering from the boundary carry 0
        break;
      }
    }
    out[c] = exited ? 0.0 : u0.eval(0.0, x);
  }
  return out;
}

DiagnosticsReport build_report(const EvolutionRun& run,
                               const std::vector<BVAuditRecord>& bv_audits,
                               const Cutoff* cutoff) {
  const EvolutionConfig& cfg = run.cfg;
  const Grid& g = cfg.grid;
  DiagnosticsReport rep;
  rep.bv_audits = bv_audits;

  double div_neg = 0.0, lambda_v = 0.0;
  rep.energy_ledger_ok = true;
  for (const auto& e : run.ledger) {
    div_neg = std::max(div_neg, e.div_neg);
    lambda_v = std::max(lambda_v, e.lambda_v);
    if (run.j0_finite && !e.energy_ok) rep.energy_ledger_ok = false;
    for (const auto& a : e.audits) {
      rep.estimate_audits.emplace_back(e.t, a);
      ++rep.audits_total;
      if (a.pass)
        ++rep.audits_passed;
      else
        ++rep.audits_failed;
      if (a.rhs > 1e-12) rep.worst_ratio = std::max(rep.worst_ratio, a.lhs / a.rhs);
    }
  }
  rep.lambda0 = div_neg > 0 ? 1.0 / div_neg : std::numeric_limits<double>::infinity();
  rep.lambda_v = lambda_v;
  rep.lambda1 = lambda_v > 0 ? 1.0 / lambda_v : std::numeric_limits<double>::infinity();

  for (const auto& a : bv_audits) {
    ++rep.audits_total;
    switch (a.status) {
      case AuditStatus::Pass: ++rep.audits_passed; break;
      case AuditStatus::PassWithSlack: ++rep.audits_slack; break;
      case AuditStatus::Fail: ++rep.audits_failed; break;
    }
    rep.worst_ratio = std::max(rep.worst_ratio, a.ratio);
  }

  // M_q curves at snapshot times
  for (size_t s = 0; s < run.u_snaps.size(); ++s) {
    MqCurvePoint pt;
    pt.t = run.snap_times[s];
    pt.norm_l1 = lq_norm(run.u_snaps[s], g, 1.0);
    pt.norm_l2 = lq_norm(run.u_snaps[s], g, 2.0);
    pt.norm_linf = lq_norm(run.u_snaps[s], g, std::numeric_limits<double>::infinity());
    const int step = run.snap_steps[s];
    pt.bound_l1 = mq_eps_bound(run, 1.0, step);
    pt.bound_l2 = mq_eps_bound(run, 2.0, step);
    pt.bound_linf = mq_eps_bound(run, std::numeric_limits<double>::infinity(), step);
    rep.mq_curve.push_back(pt);
  }

  // energy budget rows (Poincare-based); skipped without a Dirichlet wall
  rep.energy_budget_available = g.bc.has_dirichlet(g.dim) && run.j0_finite;
  if (rep.energy_budget_available) {
    double wmax = g.width(0);
    if (g.dim == 2) wmax = std::max(wmax, g.width(1));
    rep.poincare_constant = 2.0 * wmax / kPi;
    const double cp2 = rep.poincare_constant * rep.poincare_constant;
    for (const auto& e : run.ledger) {
      EnergyBudgetRow row;
      row.t = e.t;
      row.lhs = (e.j_int - e.j_prev) / cfg.eps + 0.5 * e.eps_grad_p_sq / cfg.eps;
      const double m2 = mq_eps_bound(run, 2.0, e.step);
      row.rhs = cp2 * (e.f_l2 * e.f_l2 + e.div_neg * e.div_neg * m2 * m2);
      row.ok = row.lhs <= row.rhs + 1e-9 * (1.0 + std::fabs(row.rhs));
      rep.energy_budget.push_back(row);
    }
  }

  // TV series
  for (size_t s = 0; s < run.u_snaps.size(); ++s) {
    TvSeriesRow row;
    row.t = run.snap_times[s];
    for (int axis = 0; axis < g.dim; ++axis) {
      row.tv_plain[axis] = directional_tv(run.u_snaps[s], g, axis);
      if (cutoff) row.tv_weighted[axis] = directional_tv(run.u_snaps[s], g, axis, &cutoff->omega);
    }
    rep.tv_series.push_back(row);
  }
  return rep;
}

}  // namespace driftbv
