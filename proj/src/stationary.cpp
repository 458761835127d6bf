#include "driftbv/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace driftbv {

namespace {

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

}  // namespace

DiscreteOperators assemble(const Grid& grid, const AveragedSample& v_sample, double lambda) {
  if (!(lambda > 0)) throw StepTooLarge("assemble: lambda must be positive");
  DiscreteOperators ops;
  ops.A.init(grid);
  ops.D.init(grid);
  const int nx = grid.n[0], ny = grid.n[1];

  for (int axis = 0; axis < grid.dim; ++axis) {
    const double h = grid.h[axis];
    const double area = grid.face_area(axis);
    const double tau = area / h;
    const int dlo = axis == 0 ? 0 : 2;  // direction index of the low-side neighbor
    const int dhi = axis == 0 ? 1 : 3;

    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int c = grid.index(i, j);
        const int k = axis == 0 ? i : j;
        const int nk = axis == 0 ? nx : ny;

        // diffusive fluxes
        if (k > 0) {
          ops.A.diag[c] += tau;
          ops.A.off[dlo][c] -= tau;
        } else if (grid.bc.label[axis][0] == BcKind::Dirichlet) {
          ops.A.diag[c] += 2.0 * tau;  // half-cell flux against p = 0 at the wall
        }
        if (k < nk - 1) {
          ops.A.diag[c] += tau;
          ops.A.off[dhi][c] -= tau;
        } else if (grid.bc.label[axis][1] == BcKind::Dirichlet) {
          ops.A.diag[c] += 2.0 * tau;
        }

        // upwind advective fluxes; face arrays are indexed along this axis
        const int fstride = axis == 0 ? 1 : nx;
        const int fbase = axis == 0 ? i + (nx + 1) * j : i + nx * j;
        const double v_lo = v_sample.face_normal[axis][fbase];
        const double v_hi = v_sample.face_normal[axis][fbase + fstride];

        // low face: flux into the cell is +v_lo*area (normal points up-axis)
        if (k > 0) {
          if (v_lo >= 0.0)
            ops.D.off[dlo][c] -= v_lo * area;  // upwind neighbor value enters
          else
            ops.D.diag[c] -= v_lo * area;
        } else if (grid.bc.label[axis][0] == BcKind::Dirichlet) {
          // outward normal is -e_axis: outflow when v_lo < 0
          if (v_lo < 0.0) ops.D.diag[c] -= v_lo * area;
          // inflow carries exterior value 0: no entry
        }
        // high face: flux out of the cell is +v_hi*area
        if (k < nk - 1) {
          if (v_hi >= 0.0)
            ops.D.diag[c] += v_hi * area;
          else
            ops.D.off[dhi][c] += v_hi * area;
        } else if (grid.bc.label[axis][1] == BcKind::Dirichlet) {
          if (v_hi > 0.0) ops.D.diag[c] += v_hi * area;
        }
      }
  }
  ops.drift_present = !ops.D.empty();
  return ops;
}

StationaryProblem::StationaryProblem(const Grid& g, double lam, RegularizedGraph rg,
                                     const AveragedSample& vs, std::vector<double> rhs,
                                     SolverOptions o, bool bv)
    : grid(&g), lambda(lam), graph(rg), drift(&vs), f(std::move(rhs)), opts(o), bv_guard(bv) {
  if ((int)f.size() != g.cell_count())
    throw GridMismatch("StationaryProblem: rhs not sampled on the grid");
  if (!(lambda > 0)) throw StepTooLarge("StationaryProblem: lambda must be positive");
  if (!(lambda < vs.lambda0())) {
    std::ostringstream msg;
    msg << "StationaryProblem: lambda = " << lambda << " violates lambda0 = " << vs.lambda0();
    throw StepTooLarge(msg.str());
  }
  if (bv_guard && !(lambda < vs.lambda1())) {
    std::ostringstream msg;
    msg << "StationaryProblem: lambda = " << lambda
        << " violates the BV guard lambda1 = " << vs.lambda1();
    throw StepTooLarge(msg.str());
  }
}

namespace {

struct Residual {
  const StationaryProblem& pb;
  const DiscreteOperators& ops;
  double vol;
  mutable std::vector<double> ap, dv;

  void eval(const std::vector<double>& p, std::vector<double>& v,
            std::vector<double>& F) const {
    const int nc = pb.grid->cell_count();
    v.resize(nc);
    for (int c = 0; c < nc; ++c) v[c] = yosida_eval(pb.graph, p[c]);
    ops.A.matvec(p, ap);
    if (ops.drift_present)
      ops.D.matvec(v, dv);
    else
      dv.assign(nc, 0.0);
    F.resize(nc);
    for (int c = 0; c < nc; ++c)
      F[c] = vol * v[c] + pb.lambda * ap[c] + pb.lambda * dv[c] - vol * pb.f[c];
  }
};

double norm2(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// J = (M + lambda D) diag(slope) + lambda A, slope evaluated per column
void build_jacobian(const StationaryProblem& pb, const DiscreteOperators& ops, double vol,
                    const std::vector<double>& slope, StencilMatrix& J) {
  const Grid& g = *pb.grid;
  J.init(g);
  const int nc = g.cell_count();
  const int ndir = g.dim == 1 ? 2 : 4;
  for (int c = 0; c < nc; ++c) {
    J.diag[c] = vol * slope[c] + pb.lambda * ops.A.diag[c] + pb.lambda * ops.D.diag[c] * slope[c];
    for (int d = 0; d < ndir; ++d) {
      const int nb = ops.A.neighbor(c, d);
      if (nb < 0) continue;
      J.off[d][c] = pb.lambda * ops.A.off[d][c] + pb.lambda * ops.D.off[d][c] * slope[nb];
    }
  }
}

}  // namespace

StationarySolution solve_stationary(const StationaryProblem& pb) {
  if (pb.graph.base.kind == GraphKind::TransportZero) return solve_transport_step(pb);
  const Grid& g = *pb.grid;
  const int nc = g.cell_count();
  const double vol = g.cell_volume();
  const DiscreteOperators ops = assemble(g, *pb.drift, pb.lambda);
  const Residual res{pb, ops, vol, {}, {}};
  const double slope_floor = pb.opts.slope_floor_rel / pb.graph.delta;

  StationarySolution sol;
  // start from beta_delta^{-1}(f): exact when lambda -> 0, and it seeds the
  // Jacobian with the right nondegenerate slopes
  sol.p.assign(nc, 0.0);
  for (int c = 0; c < nc; ++c) {
    double u = pb.f[c];
    if (pb.graph.base.kind == GraphKind::Sign) u = std::clamp(u, -1.0, 1.0);
    sol.p[c] = yosida_inverse(pb.graph, u);
  }
  std::vector<double> F, v, slope(nc), delta(nc), p_try(nc), v_try, F_try;
  res.eval(sol.p, v, F);
  double fnorm = norm2(F);

  std::vector<double> mf(nc);
  for (int c = 0; c < nc; ++c) mf[c] = vol * pb.f[c];
  const double target = std::max(pb.opts.newton_tol * norm2(mf), pb.opts.newton_abs_floor);

  StencilMatrix J;
  bool newton_stuck = false;
  while (sol.newton_iters < pb.opts.max_newton && fnorm > target) {
    for (int c = 0; c < nc; ++c)
      slope[c] = std::max(yosida_slope(pb.graph, sol.p[c]), slope_floor);
    build_jacobian(pb, ops, vol, slope, J);
    std::vector<double> neg_f(nc);
    for (int c = 0; c < nc; ++c) neg_f[c] = -F[c];
    delta.assign(nc, 0.0);
    auto lin = solve_linear(J, neg_f, delta, pb.opts.linear_tol, pb.opts.max_linear,
                            !ops.drift_present);
    sol.linear_iters += lin.iterations;
    if (!lin.converged && g.dim == 2) {
      // retry with a tiny diagonal shift; saturated graph branches can zero
      // entire Jacobian rows on all-Neumann problems
      for (int c = 0; c < nc; ++c) J.diag[c] += 1e-12 * vol;
      delta.assign(nc, 0.0);
      lin = solve_bicgstab(J, neg_f, delta, pb.opts.linear_tol, pb.opts.max_linear);
      sol.linear_iters += lin.iterations;
      sol.fallback_used = true;
    }

    double alpha = 1.0;
    double best = fnorm;
    bool improved = false;
    while (alpha >= pb.opts.damping_min) {
      for (int c = 0; c < nc; ++c) p_try[c] = sol.p[c] + alpha * delta[c];
      res.eval(p_try, v_try, F_try);
      const double fn = norm2(F_try);
      if (fn < best) {
        sol.p = p_try;
        v = v_try;
        F = F_try;
        fnorm = fn;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    ++sol.newton_iters;
    if (!improved) {
      newton_stuck = true;
      break;
    }
  }

  if (fnorm > target && (newton_stuck || sol.newton_iters >= pb.opts.max_newton)) {
    // frozen-slope fallback: replace beta' by its Lipschitz bound 1/delta,
    // a globally convergent (if slow) contraction for the monotone system
    sol.fallback_used = true;
    const double lip = 1.0 / pb.graph.delta;
    std::vector<double> s(nc, lip);
    build_jacobian(pb, ops, vol, s, J);
    for (int it = 0; it < pb.opts.max_picard && fnorm > target; ++it) {
      std::vector<double> neg_f(nc);
      for (int c = 0; c < nc; ++c) neg_f[c] = -F[c];
      delta.assign(nc, 0.0);
      auto lin =
          solve_linear(J, neg_f, delta, pb.opts.linear_tol, pb.opts.max_linear, false);
      sol.linear_iters += lin.iterations;
      for (int c = 0; c < nc; ++c) sol.p[c] += delta[c];
      res.eval(sol.p, v, F);
      fnorm = norm2(F);
      ++sol.newton_iters;
    }
  }

  sol.v = v;
  sol.residual = fnorm;
  sol.converged = fnorm <= target;
  if (!sol.converged)
    throw SolveFailed("solve_stationary: no convergence after " +
                          std::to_string(sol.newton_iters) + " iterations",
                      fnorm);
  return sol;
}

StationarySolution solve_transport_step(const StationaryProblem& pb) {
  const Grid& g = *pb.grid;
  const int nc = g.cell_count();
  const double vol = g.cell_volume();
  const DiscreteOperators ops = assemble(g, *pb.drift, pb.lambda);

  StencilMatrix sys;
  sys.init(g);
  const int ndir = g.dim == 1 ? 2 : 4;
  for (int c = 0; c < nc; ++c) {
    sys.diag[c] = vol + pb.lambda * ops.D.diag[c];
    for (int d = 0; d < ndir; ++d) sys.off[d][c] = pb.lambda * ops.D.off[d][c];
  }
  std::vector<double> rhs(nc);
  for (int c = 0; c < nc; ++c) rhs[c] = vol * pb.f[c];

  StationarySolution sol;
  sol.p.assign(nc, 0.0);
  sol.v.assign(nc, 0.0);
  auto lin = solve_linear(sys, rhs, sol.v, pb.opts.linear_tol, pb.opts.max_linear, false);
  sol.linear_iters = lin.iterations;
  if (g.dim == 1) {
    // direct solve; recompute the residual for the ledger
    std::vector<double> ax;
    sys.matvec(sol.v, ax);
    double r = 0.0;
    for (int c = 0; c < nc; ++c) r += (ax[c] - rhs[c]) * (ax[c] - rhs[c]);
    sol.residual = std::sqrt(r);
    sol.converged = std::isfinite(sol.residual);
  } else {
    sol.residual = lin.residual;
    sol.converged = lin.converged;
  }
  if (!sol.converged) throw SolveFailed("solve_transport_step: linear solve failed", sol.residual);
  return sol;
}

EstimateId parse_estimate_id(const std::string& text) {
  auto parse_num = [&](const std::string& s) {
    try {
      return std::stod(s);
    } catch (...) {
      throw UnknownEstimate("bad estimate parameter in '" + text + "'");
    }
  };
  if (text == "lmst") return {EstimateKind::Lmst, 0, 0};
  if (text == "linfty") return {EstimateKind::Linfty, 0, 0};
  if (text == "positivity") return {EstimateKind::Positivity, 0, 0};
  if (text.rfind("lq:", 0) == 0) {
    const std::string arg = text.substr(3);
    if (arg == "inf") return {EstimateKind::Lq, std::numeric_limits<double>::infinity(), 0};
    const double q = parse_num(arg);
    if (q < 1.0) throw UnknownEstimate("lq estimate needs q >= 1 in '" + text + "'");
    return {EstimateKind::Lq, q, 0};
  }
  if (text.rfind("kcontraction:", 0) == 0)
    return {EstimateKind::KContraction, 0, parse_num(text.substr(13))};
  if (text.rfind("kminus:", 0) == 0)
    return {EstimateKind::KContractionMinus, 0, parse_num(text.substr(7))};
  throw UnknownEstimate("unknown estimate id '" + text + "'");
}

std::string estimate_name(const EstimateId& id) {
  std::ostringstream os;
  switch (id.kind) {
    case EstimateKind::Lq:
      if (std::isinf(id.q))
        os << "lq:inf";
      else
        os << "lq:" << id.q;
      break;
    case EstimateKind::Lmst: os << "lmst"; break;
    case EstimateKind::KContraction: os << "kcontraction:" << id.k; break;
    case EstimateKind::KContractionMinus: os << "kminus:" << id.k; break;
    case EstimateKind::Linfty: os << "linfty"; break;
    case EstimateKind::Positivity: os << "positivity"; break;
  }
  return os.str();
}

double grad_norm_sq(const DiscreteOperators& ops, const std::vector<double>& p) {
  std::vector<double> ap;
  ops.A.matvec(p, ap);
  double s = 0.0;
  for (size_t c = 0; c < p.size(); ++c) s += p[c] * ap[c];
  return s;
}

EstimateAudit verify_stationary_estimate(const StationarySolution& sol,
                                         const StationaryProblem& pb, const EstimateId& which) {
  const Grid& g = *pb.grid;
  const double vol = g.cell_volume();
  const double d = pb.drift->div_neg_sup;
  const double lam = pb.lambda;

  EstimateAudit audit;
  audit.name = estimate_name(which);
  switch (which.kind) {
    case EstimateKind::Lq: {
      const double q = which.q;
      const double coef = std::isinf(q) ? 1.0 - lam * d : 1.0 - (q - 1.0) * lam * d;
      audit.lhs = coef * lq_of(g, sol.v, q);
      audit.rhs = lq_of(g, pb.f, q);
      break;
    }
    case EstimateKind::Linfty: {
      audit.lhs = (1.0 - lam * d) * lq_of(g, sol.v, std::numeric_limits<double>::infinity());
      audit.rhs = lq_of(g, pb.f, std::numeric_limits<double>::infinity());
      break;
    }
    case EstimateKind::Lmst: {
      const DiscreteOperators ops = assemble(g, *pb.drift, lam);
      double vp = 0.0, fp = 0.0;
      for (int c = 0; c < g.cell_count(); ++c) {
        vp += vol * sol.v[c] * sol.p[c];
        fp += vol * pb.f[c] * sol.p[c];
      }
      audit.lhs = (1.0 - lam * d) * vp + lam * grad_norm_sq(ops, sol.p);
      audit.rhs = fp;
      break;
    }
    case EstimateKind::KContraction: {
      const double k = which.k;
      double lhs = 0.0, rhs = 0.0;
      for (int c = 0; c < g.cell_count(); ++c) {
        lhs += vol * std::max(sol.v[c] - k, 0.0);
        rhs += vol * std::max(pb.f[c] - k * (1.0 - lam * d), 0.0);
      }
      audit.lhs = lhs;
      audit.rhs = rhs;
      break;
    }
    case EstimateKind::KContractionMinus: {
      const double k = which.k;
      double lhs = 0.0, rhs = 0.0;
      for (int c = 0; c < g.cell_count(); ++c) {
        lhs += vol * std::max(k - sol.v[c], 0.0);
        rhs += vol * std::max(-pb.f[c] + k * (1.0 - lam * d), 0.0);
      }
      audit.lhs = lhs;
      audit.rhs = rhs;
      break;
    }
    case EstimateKind::Positivity: {
      // k-contraction-minus at k = 0: f >= 0 forces v >= 0
      double lhs = 0.0, rhs = 0.0;
      for (int c = 0; c < g.cell_count(); ++c) {
        lhs += vol * std::max(-sol.v[c], 0.0);
        rhs += vol * std::max(-pb.f[c], 0.0);
      }
      audit.lhs = lhs;
      audit.rhs = rhs;
      break;
    }
  }
  audit.margin = audit.rhs - audit.lhs;
  audit.pass = audit.lhs <= audit.rhs * (1.0 + 1e-8) + 1e-12;
  return audit;
}

}  // namespace driftbv
