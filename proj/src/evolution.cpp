#include "driftbv/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace driftbv {

namespace {

constexpr std::array<double, 5> kGaussX = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW = {0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

double lq_of(const Grid& g, const std::vector<double>& field, double q) {
  const double vol = g.cell_volume();
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : field) m = std::max(m, std::fabs(v));
    return m;
  }
  double s = 0.0;
  for (double v : field) s += std::pow(std::fabs(v), q) * vol;
  return std::pow(s, 1.0 / q);
}

StepResult euler_step_impl(const std::vector<double>& u_prev, double j_prev, int i,
                           const EvolutionConfig& cfg, const AveragedSample* cached_v,
                           const std::vector<double>* cached_f) {
  const Grid& g = cfg.grid;
  const int nc = g.cell_count();
  const double eps = cfg.eps;
  const double t0 = i * eps, t1 = (i + 1) * eps;

  AveragedSample vi_local;
  const AveragedSample* vi = cached_v;
  if (!vi) {
    vi_local = time_average(cfg.drift, t0, t1, g);
    vi = &vi_local;
  }
  std::vector<double> fi_local;
  const std::vector<double>* fi = cached_f;
  if (!fi) {
    fi_local = time_average_scalar(cfg.source, t0, t1, g);
    fi = &fi_local;
  }

  // step guards use the per-interval constants
  if (!(eps < vi->lambda0())) {
    std::ostringstream msg;
    msg << "euler_step " << i << ": eps = " << eps << " >= lambda0 = " << vi->lambda0();
    throw StepTooLarge(msg.str());
  }
  if (cfg.bv_guard && !(eps < vi->lambda1())) {
    std::ostringstream msg;
    msg << "euler_step " << i << ": eps = " << eps << " >= lambda1 = " << vi->lambda1();
    throw StepTooLarge(msg.str());
  }

  std::vector<double> rhs(nc);
  for (int c = 0; c < nc; ++c) rhs[c] = u_prev[c] + eps * (*fi)[c];

  RegularizedGraph rg(cfg.graph, cfg.delta_used);
  StationaryProblem pb(g, eps, rg, *vi, rhs, cfg.solver, cfg.bv_guard);
  StationarySolution sol = cfg.graph.kind == GraphKind::TransportZero
                               ? solve_transport_step(pb)
                               : solve_stationary(pb);

  StepResult out;
  out.u = sol.v;
  out.p = sol.p;
  StepLedgerEntry& e = out.entry;
  e.step = i + 1;
  e.t = t1;
  e.residual = sol.residual;
  e.newton_iters = sol.newton_iters;
  e.linear_iters = sol.linear_iters;
  e.fallback = sol.fallback_used;
  e.div_neg = vi->div_neg_sup;
  e.lambda_v = vi->lambda_v;
  e.f_l1 = lq_of(g, *fi, 1.0);
  e.f_l2 = lq_of(g, *fi, 2.0);
  e.f_linf = lq_of(g, *fi, std::numeric_limits<double>::infinity());
  const double vol = g.cell_volume();
  e.mass = 0.0;
  for (int c = 0; c < nc; ++c) e.mass += vol * out.u[c];
  e.l1 = lq_of(g, out.u, 1.0);
  e.l2 = lq_of(g, out.u, 2.0);
  e.linf = lq_of(g, out.u, std::numeric_limits<double>::infinity());

  // energy ledger: int j(u_i) + eps||grad p_i||^2 <= eps int f_i p_i
  //   + eps int (div V_i)^- p_i u_i + int j(u_{i-1})
  const DiscreteOperators ops = assemble(g, *vi, eps);
  e.j_prev = j_prev;
  e.j_int = 0.0;
  for (int c = 0; c < nc; ++c) e.j_int += vol * primitive_j(rg, out.u[c]);
  e.eps_grad_p_sq = eps * grad_norm_sq(ops, out.p);
  e.eps_f_p = 0.0;
  e.eps_divneg_pu = 0.0;
  for (int c = 0; c < nc; ++c) {
    e.eps_f_p += eps * vol * (*fi)[c] * out.p[c];
    e.eps_divneg_pu += eps * vol * vi->div_neg_cell[c] * out.p[c] * out.u[c];
  }
  e.energy_ok = e.j_int + e.eps_grad_p_sq <=
                e.eps_f_p + e.eps_divneg_pu + e.j_prev +
                    1e-10 * (1.0 + std::fabs(e.j_prev) + std::fabs(e.eps_f_p));

  if (cfg.audit_per_step) {
    for (const char* id : {"lq:1", "lq:2", "lq:inf", "lmst", "positivity"})
      e.audits.push_back(verify_stationary_estimate(sol, pb, parse_estimate_id(id)));
    // the L^inf argument's threshold k
    const double d = vi->div_neg_sup;
    const double k = lq_of(g, rhs, std::numeric_limits<double>::infinity()) /
                     std::max(1.0 - eps * d, 1e-12);
    e.audits.push_back(
        verify_stationary_estimate(sol, pb, EstimateId{EstimateKind::KContraction, 0, k}));
  }
  return out;
}

}  // namespace

void EvolutionConfig::finalize() {
  if (!(T > 0) || !(eps_requested > 0))
    throw InvalidInput("evolution: T and eps must be positive");
  n_steps = (int)std::ceil(T / eps_requested - 1e-12);
  n_steps = std::max(n_steps, 1);
  eps = T / n_steps;
  eps_adjusted = std::fabs(eps - eps_requested) > 1e-14 * T;
  delta_used = delta > 0 ? delta : eps;
  u0 = sample_scalar(initial, 0.0, grid);
  if (snapshot_stride == 0) snapshot_stride = std::max(1, (n_steps + 511) / 512);
}

int EvolutionRun::snapshot_of_step(int step) const {
  for (size_t k = 0; k < snap_steps.size(); ++k)
    if (snap_steps[k] == step) return (int)k;
  return -1;
}

StepResult euler_step(const std::vector<double>& u_prev, double j_prev, int i,
                      const EvolutionConfig& cfg) {
  return euler_step_impl(u_prev, j_prev, i, cfg, nullptr, nullptr);
}

EvolutionRun run(const EvolutionConfig& cfg_in) {
  EvolutionRun out;
  out.cfg = cfg_in;
  EvolutionConfig& cfg = out.cfg;
  if (cfg.n_steps == 0) cfg.finalize();

  const Grid& g = cfg.grid;
  RegularizedGraph rg(cfg.graph, cfg.delta_used);
  out.j0 = 0.0;
  out.j0_finite = true;
  const double vol = g.cell_volume();
  try {
    for (double u : cfg.u0) out.j0 += vol * primitive_j(rg, u);
  } catch (const OutsideDomainOfJ&) {
    out.j0_finite = false;  // energy ledger rows are skipped, not faked
    out.j0 = std::numeric_limits<double>::infinity();
  }

  out.snap_steps.push_back(0);
  out.snap_times.push_back(0.0);
  out.u_snaps.push_back(cfg.u0);
  out.p_snaps.emplace_back(g.cell_count(), 0.0);

  // time-independent data is averaged once and shared across all steps
  AveragedSample v_cache;
  std::vector<double> f_cache;
  const AveragedSample* v_ptr = nullptr;
  const std::vector<double>* f_ptr = nullptr;
  if (!cfg.drift.time_dependent()) {
    v_cache = time_average(cfg.drift, 0.0, cfg.eps, g);
    v_ptr = &v_cache;
  }
  if (!cfg.source.time_dependent()) {
    f_cache = time_average_scalar(cfg.source, 0.0, cfg.eps, g);
    f_ptr = &f_cache;
  }

  std::vector<double> u = cfg.u0;
  double j_prev = out.j0;
  for (int i = 0; i < cfg.n_steps; ++i) {
    try {
      StepResult sr = euler_step_impl(u, j_prev, i, cfg, v_ptr, f_ptr);
      u = sr.u;
      j_prev = sr.entry.j_int;
      out.ledger.push_back(std::move(sr.entry));
      const int step = i + 1;
      if (step % cfg.snapshot_stride == 0 || step == cfg.n_steps) {
        out.snap_steps.push_back(step);
        out.snap_times.push_back(step * cfg.eps);
        out.u_snaps.push_back(std::move(sr.u));
        out.p_snaps.push_back(std::move(sr.p));
      }
    } catch (const std::runtime_error& err) {
      out.failed = true;
      out.failed_step = i;
      out.failure = err.what();
      break;
    }
  }
  return out;
}

std::vector<double> interpolant_eval(const EvolutionRun& run, double t, InterpKind which) {
  const EvolutionConfig& cfg = run.cfg;
  if (!(t >= 0.0) || !(t < cfg.T)) throw TimeOutOfRange("interpolant_eval: t outside [0, T)");
  if (!run.per_step_snapshots())
    throw InvalidInput("interpolant_eval: run was strided; per-step snapshots required");
  const double eps = cfg.eps;
  int i = (int)std::floor(t / eps);
  i = std::clamp(i, 0, cfg.n_steps - 1);
  const double ti = i * eps, ti1 = (i + 1) * eps;
  const auto& ui = run.u_snaps[i];
  const auto& ui1 = run.u_snaps[i + 1];
  if (which == InterpKind::PiecewiseConstant) return ui1;
  std::vector<double> out(ui.size());
  for (size_t c = 0; c < ui.size(); ++c)
    out[c] = ((t - ti) * ui1[c] - (t - ti1) * ui[c]) / eps;
  return out;
}

double mq_bound(const EvolutionRun& run, double q, double t) {
  if (!(q >= 1.0)) throw InvalidInput("mq_bound: q must be >= 1");
  const EvolutionConfig& cfg = run.cfg;
  const Grid& g = cfg.grid;
  const double eps = cfg.eps;
  double int_f = 0.0, int_div = 0.0;
  const int full = std::min((int)run.ledger.size(), (int)std::floor(t / eps + 1e-12));
  for (int i = 0; i < full; ++i) {
    // ||f(s)||_q by 5-point Gauss over the step
    const double t0 = i * eps, tm = t0 + 0.5 * eps, th = 0.5 * eps;
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) {
      auto fs = sample_scalar(cfg.source, tm + th * kGaussX[k], g);
      acc += kGaussW[k] * lq_of(g, fs, q);
    }
    int_f += 0.5 * eps * acc;
    int_div += eps * run.ledger[i].div_neg;
  }
  const double u0q = lq_of(g, cfg.u0, q);
  const double coef = std::isinf(q) ? 1.0 : q - 1.0;
  return std::exp(coef * int_div) * (u0q + int_f);
}

double mq_eps_bound(const EvolutionRun& run, double q, int step) {
  const Grid& g = run.cfg.grid;
  const double eps = run.cfg.eps;
  double int_f = 0.0, int_div = 0.0;
  for (int i = 0; i < step && i < (int)run.ledger.size(); ++i) {
    const auto& e = run.ledger[i];
    const double fq = std::isinf(q) ? e.f_linf : (q == 1.0 ? e.f_l1 : e.f_l2);
    int_f += eps * fq;
    int_div += eps * e.div_neg;
  }
  const double u0q = lq_of(g, run.cfg.u0, q);
  const double coef = std::isinf(q) ? 1.0 : q - 1.0;
  return std::exp(coef * int_div) * (u0q + int_f);
}

double mq_eps_product_bound(const EvolutionRun& run, double q, int step) {
  const Grid& g = run.cfg.grid;
  const double eps = run.cfg.eps;
  const double coef = std::isinf(q) ? 1.0 : q - 1.0;
  double acc = lq_of(g, run.cfg.u0, q);
  for (int i = 0; i < step && i < (int)run.ledger.size(); ++i) {
    const auto& e = run.ledger[i];
    const double fq = std::isinf(q) ? e.f_linf : (q == 1.0 ? e.f_l1 : e.f_l2);
    const double shrink = 1.0 - coef * eps * e.div_neg;
    if (!(shrink > 0)) return std::numeric_limits<double>::infinity();
    acc = (acc + eps * fq) / shrink;
  }
  return acc;
}

std::vector<DeltaStudyRow> delta_refinement_study(const EvolutionConfig& base,
                                                  const std::vector<double>& deltas,
                                                  bool* monotone) {
  if (deltas.size() < 2) throw InvalidInput("delta study needs at least two deltas");
  for (size_t k = 1; k < deltas.size(); ++k)
    if (!(deltas[k] < deltas[k - 1]))
      throw InvalidInput("delta study expects strictly decreasing deltas");

  const Grid& g = base.grid;
  const double vol = g.cell_volume();
  std::vector<EvolutionRun> runs;
  for (double d : deltas) {
    EvolutionConfig cfg = base;
    cfg.delta = d;
    cfg.n_steps = 0;  // re-finalize with the new delta
    cfg.snapshot_stride = 1;
    cfg.audit_per_step = false;
    cfg.finalize();
    EvolutionRun r = run(cfg);
    if (r.failed) throw SolveFailed("delta study: run failed at delta=" + std::to_string(d), 0.0);
    runs.push_back(std::move(r));
  }

  // the H1 seminorm only needs the stiffness part; assemble once with zero drift
  AveragedSample zero_sample = time_average(DriftField::zero(g.dim), 0.0, 1.0, g);
  const DiscreteOperators ops = assemble(g, zero_sample, 1.0);

  std::vector<DeltaStudyRow> rows;
  for (size_t k = 0; k + 1 < runs.size(); ++k) {
    const auto& ra = runs[k];
    const auto& rb = runs[k + 1];
    DeltaStudyRow row;
    row.delta_coarse = deltas[k];
    row.delta_fine = deltas[k + 1];
    double du = 0.0, dp = 0.0;
    const double eps = ra.cfg.eps;
    for (size_t s = 1; s < ra.u_snaps.size(); ++s) {
      double cell_u = 0.0;
      for (size_t c = 0; c < ra.u_snaps[s].size(); ++c) {
        const double e = ra.u_snaps[s][c] - rb.u_snaps[s][c];
        cell_u += vol * e * e;
      }
      du += eps * cell_u;
      std::vector<double> pd(ra.p_snaps[s].size());
      for (size_t c = 0; c < pd.size(); ++c) pd[c] = ra.p_snaps[s][c] - rb.p_snaps[s][c];
      dp += eps * grad_norm_sq(ops, pd);
    }
    row.u_dist = std::sqrt(du);
    row.p_dist = std::sqrt(dp);
    rows.push_back(row);
  }
  if (monotone) {
    *monotone = true;
    for (size_t k = 1; k < rows.size(); ++k)
      if (rows[k].u_dist > rows[k - 1].u_dist) *monotone = false;
  }
  return rows;
}

}  // namespace driftbv
