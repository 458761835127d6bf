#include "driftbv/runner.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>

#include "driftbv/battery.hpp"

namespace driftbv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// fixed formatting keeps artifacts bitwise reproducible
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path resolve_out_dir(const RunConfig& rc, const std::string& out_root) {
  std::string root = out_root;
  if (root.empty()) {
    const char* env = std::getenv("DRIFTBV_OUT");
    root = env ? env : ".";
  }
  return fs::path(root) / rc.output_dir;
}

void write_snapshots(const EvolutionRun& run, const fs::path& dir) {
  const Grid& g = run.cfg.grid;
  for (size_t s = 0; s < run.u_snaps.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "snapshot_%04zu.csv", s);
    std::ofstream out(dir / name);
    out << "i,j,x,y,u,p\n";
    for (int c = 0; c < g.cell_count(); ++c) {
      const auto x = g.center(c);
      out << g.ci(c) << ',' << g.cj(c) << ',' << fmt(x[0]) << ',' << fmt(x[1]) << ','
          << fmt(run.u_snaps[s][c]) << ',' << fmt(run.p_snaps[s][c]) << '\n';
    }
  }
}

void write_steps_csv(const EvolutionRun& run, const fs::path& dir) {
  std::ofstream out(dir / "steps.csv");
  out << "step,t,residual,newton_iters,linear_iters,fallback,mass,l1,l2,linf,"
         "div_neg,lambda_v,f_l1,f_l2,f_linf,j_int,eps_grad_p_sq,eps_f_p,eps_divneg_pu,"
         "energy_ok\n";
  for (const auto& e : run.ledger) {
    out << e.step << ',' << fmt(e.t) << ',' << fmt(e.residual) << ',' << e.newton_iters << ','
        << e.linear_iters << ',' << (e.fallback ? 1 : 0) << ',' << fmt(e.mass) << ','
        << fmt(e.l1) << ',' << fmt(e.l2) << ',' << fmt(e.linf) << ',' << fmt(e.div_neg) << ','
        << fmt(e.lambda_v) << ',' << fmt(e.f_l1) << ',' << fmt(e.f_l2) << ',' << fmt(e.f_linf)
        << ',' << fmt(e.j_int) << ',' << fmt(e.eps_grad_p_sq) << ',' << fmt(e.eps_f_p) << ','
        << fmt(e.eps_divneg_pu) << ',' << (e.energy_ok ? 1 : 0) << '\n';
  }
}

void write_audits_csv(const DiagnosticsReport& rep, const fs::path& dir) {
  std::ofstream out(dir / "audits.csv");
  out << "t,name,lhs,rhs,ratio,status\n";
  for (const auto& [t, a] : rep.estimate_audits) {
    const double ratio = a.rhs > 1e-12 ? a.lhs / a.rhs : 0.0;
    out << fmt(t) << ',' << a.name << ',' << fmt(a.lhs) << ',' << fmt(a.rhs) << ','
        << fmt(ratio) << ',' << (a.pass ? "pass" : "fail") << '\n';
  }
  for (const auto& a : rep.bv_audits)
    out << fmt(a.t) << ",bv_evolution," << fmt(a.lhs) << ',' << fmt(a.rhs) << ','
        << fmt(a.ratio) << ',' << audit_status_name(a.status) << '\n';
}

void write_tv_series(const DiagnosticsReport& rep, const fs::path& dir) {
  std::ofstream out(dir / "tv_series.csv");
  out << "t,tv_x,tv_y,tv_x_weighted,tv_y_weighted\n";
  for (const auto& r : rep.tv_series)
    out << fmt(r.t) << ',' << fmt(r.tv_plain[0]) << ',' << fmt(r.tv_plain[1]) << ','
        << fmt(r.tv_weighted[0]) << ',' << fmt(r.tv_weighted[1]) << '\n';
}

json report_to_json(const DiagnosticsReport& rep, const EvolutionRun& run) {
  json jr;
  jr["status"] = run.failed ? "failed" : "completed";
  if (run.failed) {
    jr["failed_step"] = run.failed_step;
    jr["failure"] = run.failure;
  }
  jr["steps"] = (int)run.ledger.size();
  jr["eps"] = run.cfg.eps;
  jr["eps_adjusted"] = run.cfg.eps_adjusted;
  jr["delta"] = run.cfg.delta_used;
  jr["audits"] = {{"total", rep.audits_total},
                  {"passed", rep.audits_passed},
                  {"pass_with_slack", rep.audits_slack},
                  {"failed", rep.audits_failed},
                  {"worst_ratio", rep.worst_ratio}};
  jr["constants"] = {
      {"lambda0", std::isinf(rep.lambda0) ? json("inf") : json(rep.lambda0)},
      {"lambda1", std::isinf(rep.lambda1) ? json("inf") : json(rep.lambda1)},
      {"lambda_v", rep.lambda_v},
      // lambda_V of the Gronwall iteration is identified with 1/lambda1
      {"lambda_v_is_inverse_lambda1", true}};
  jr["energy_ledger_ok"] = rep.energy_ledger_ok;
  jr["j0_finite"] = run.j0_finite;

  json mq = json::array();
  for (const auto& p : rep.mq_curve)
    mq.push_back({{"t", p.t},
                  {"l1", p.norm_l1},
                  {"l2", p.norm_l2},
                  {"linf", p.norm_linf},
                  {"m1", p.bound_l1},
                  {"m2", p.bound_l2},
                  {"minf", p.bound_linf}});
  jr["mq_curve"] = mq;

  jr["energy_budget_available"] = rep.energy_budget_available;
  if (rep.energy_budget_available) {
    jr["poincare_constant"] = rep.poincare_constant;
    json rows = json::array();
    int violations = 0;
    for (const auto& r : rep.energy_budget) {
      rows.push_back({{"t", r.t}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ok", r.ok}});
      if (!r.ok) ++violations;
    }
    jr["energy_budget"] = rows;
    jr["energy_budget_violations"] = violations;
  }
  return jr;
}

struct PreparedRun {
  RunConfig rc;
  EvolutionRun run;
  std::vector<BVAuditRecord> bv_audits;
  DiagnosticsReport report;
  std::optional<Cutoff> cut;
  bool bv_rejected = false;
  std::string bv_rejection;
};

PreparedRun execute(const RunConfig& rc) {
  PreparedRun pr;
  pr.rc = rc;
  pr.run = run(rc.evolution);
  if (rc.cutoff_profile && !pr.run.failed) {
    pr.cut = build_cutoff(rc.evolution.grid, *rc.cutoff_profile);
    try {
      pr.bv_audits = verify_bv_evolution(pr.run, *pr.cut, rc.audit_slack);
    } catch (const CutoffRejected& e) {
      pr.bv_rejected = true;
      pr.bv_rejection = e.what();
    } catch (const InvalidInput& e) {
      pr.bv_rejected = true;  // strided snapshots
      pr.bv_rejection = e.what();
    } catch (const StepTooLarge& e) {
      pr.bv_rejected = true;  // eps >= lambda1 without the per-step guard
      pr.bv_rejection = e.what();
    }
  }
  pr.report = build_report(pr.run, pr.bv_audits, pr.cut ? &*pr.cut : nullptr);
  return pr;
}

void write_artifacts(const PreparedRun& pr, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "config.json");
    out << pr.rc.echo.dump(2) << '\n';
  }
  write_steps_csv(pr.run, dir);
  write_audits_csv(pr.report, dir);
  write_tv_series(pr.report, dir);
  write_snapshots(pr.run, dir);
  json jr = report_to_json(pr.report, pr.run);
  if (pr.bv_rejected) jr["bv_audit_rejected"] = pr.bv_rejection;
  std::ofstream out(dir / "report.json");
  out << jr.dump(2) << '\n';
}

}  // namespace

RunConfig load_config(const std::string& path_or_preset) {
  if (is_preset(path_or_preset)) return RunConfig::from_json(preset_config(path_or_preset));
  return RunConfig::from_file(path_or_preset);
}

RunOutcome cmd_run(const std::string& path_or_preset, const std::string& out_root) {
  RunOutcome rc_out;
  RunConfig rc;
  try {
    rc = load_config(path_or_preset);
  } catch (const std::exception& e) {
    rc_out.exit_code = 2;
    rc_out.message = e.what();
    return rc_out;
  }
  PreparedRun pr = execute(rc);
  const fs::path dir = resolve_out_dir(rc, out_root);
  write_artifacts(pr, dir);
  rc_out.artifact_dir = dir.string();
  // audit failures leave exit 0 but mark the report; solver failures do not
  rc_out.exit_code = pr.run.failed ? 1 : 0;
  rc_out.message = pr.run.failed ? pr.run.failure : "ok";
  return rc_out;
}

RunOutcome cmd_verify(const std::string& path_or_preset, const std::string& out_root) {
  RunOutcome out;
  RunConfig rc;
  try {
    rc = load_config(path_or_preset);
  } catch (const std::exception& e) {
    out.exit_code = 2;
    out.message = e.what();
    return out;
  }

  int failures = 0;
  std::string detail;
  const EvolutionConfig& ev = rc.evolution;

  // assumption audit: (T3) always, the shell condition when BV audits are on
  const AssumptionLevel level = rc.cutoff_profile ? AssumptionLevel::Tprime : AssumptionLevel::T;
  const double shell_h = rc.cutoff_profile ? rc.cutoff_profile->h : 0.0;
  AssumptionReport arep = check_assumptions(ev.drift, ev.grid, level, shell_h, {0.0, 0.5 * ev.T});
  if (!arep.pass(level)) {
    ++failures;
    detail += "assumption audit failed (" + arep.t3_where + "); ";
  }

  // randomized stationary battery
  if (rc.stationary_battery > 0) {
    BatteryResult br = run_stationary_battery(rc.stationary_battery, rc.seed);
    if (!br.all_passed()) {
      failures += br.audits_failed;
      detail += "stationary battery failed " + std::to_string(br.audits_failed) + " audits; ";
    }
  }

  // evolution audits
  PreparedRun pr = execute(rc);
  if (pr.run.failed) {
    ++failures;
    detail += "run failed at step " + std::to_string(pr.run.failed_step) + "; ";
  } else {
    for (const auto& e : pr.run.ledger) {
      for (const auto& a : e.audits)
        if (!a.pass) ++failures;
      if (pr.run.j0_finite && !e.energy_ok) ++failures;
      for (double q : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
        const double norm = std::isinf(q) ? e.linf : (q == 1.0 ? e.l1 : e.l2);
        const double bound = mq_eps_bound(pr.run, q, e.step);
        if (norm > bound * (1.0 + rc.audit_slack) + 1e-12) ++failures;
      }
    }
    if (pr.bv_rejected) {
      ++failures;
      detail += "bv audit rejected: " + pr.bv_rejection + "; ";
    }
    for (const auto& a : pr.bv_audits)
      if (a.status == AuditStatus::Fail || a.discrete_slack > rc.audit_slack) ++failures;
  }

  const fs::path dir = resolve_out_dir(rc, out_root);
  write_artifacts(pr, dir);
  out.artifact_dir = dir.string();

  if (pr.report.audits_total == 0 && rc.stationary_battery == 0)
    detail += "warning: empty audit set; ";
  out.exit_code = failures == 0 ? 0 : 1;
  out.message = failures == 0 ? "all audits passed" + (detail.empty() ? "" : " (" + detail + ")")
                              : std::to_string(failures) + " audit failures: " + detail;
  return out;
}

namespace {

// piecewise-constant lookup of a cell field at an arbitrary point
double sample_pw(const Grid& g, const std::vector<double>& u, double x, double y) {
  int i = (int)std::floor((x - g.lo[0]) / g.h[0]);
  i = std::clamp(i, 0, g.n[0] - 1);
  int j = 0;
  if (g.dim == 2) {
    j = (int)std::floor((y - g.lo[1]) / g.h[1]);
    j = std::clamp(j, 0, g.n[1] - 1);
  }
  return u[g.index(i, j)];
}

// L2 distance of two final-time fields on (possibly) different grids via a
// fixed probe lattice
double probe_distance(const Grid& ga, const std::vector<double>& ua, const Grid& gb,
                      const std::vector<double>& ub) {
  const int pn = 256;
  double acc = 0.0;
  if (ga.dim == 1) {
    for (int i = 0; i < pn; ++i) {
      const double x = ga.lo[0] + (i + 0.5) * ga.width(0) / pn;
      const double d = sample_pw(ga, ua, x, 0) - sample_pw(gb, ub, x, 0);
      acc += d * d * ga.width(0) / pn;
    }
  } else {
    for (int j = 0; j < pn; ++j)
      for (int i = 0; i < pn; ++i) {
        const double x = ga.lo[0] + (i + 0.5) * ga.width(0) / pn;
        const double y = ga.lo[1] + (j + 0.5) * ga.width(1) / pn;
        const double d = sample_pw(ga, ua, x, y) - sample_pw(gb, ub, x, y);
        acc += d * d * ga.width(0) * ga.width(1) / (pn * pn);
      }
  }
  return std::sqrt(acc);
}

}  // namespace

RunOutcome cmd_sweep(const std::string& path_or_preset, const std::string& axis,
                     const std::vector<double>& values, const std::string& out_root) {
  RunOutcome out;
  RunConfig rc;
  try {
    rc = load_config(path_or_preset);
  } catch (const std::exception& e) {
    out.exit_code = 2;
    out.message = e.what();
    return out;
  }
  if (axis != "eps" && axis != "delta" && axis != "cells" && axis != "cutoff.h") {
    out.exit_code = 2;
    out.message = "unknown sweep axis '" + axis + "' (use eps, delta, cells, cutoff.h)";
    return out;
  }
  if (values.empty()) {
    out.exit_code = 2;
    out.message = "sweep needs at least one value";
    return out;
  }

  struct SweepRow {
    double value;
    int steps;
    double eps;
    double mass, l2;
    double bv_ratio = -1.0;
    double dist_next = -1.0;
  };
  std::vector<SweepRow> rows;
  std::vector<PreparedRun> runs;

  std::vector<RunConfig> configs;
  for (double value : values) {
    json doc = rc.echo;
    if (axis == "eps")
      doc["time"]["eps"] = value;
    else if (axis == "delta")
      doc["graph"]["delta"] = value;
    else if (axis == "cells") {
      const int n = (int)std::lround(value);
      for (auto& c : doc["grid"]["cells"]) c = n;
      if (doc.contains("cutoff")) {
        // keep the shell several cells wide under refinement
        const double w =
            doc["grid"]["extents"][0][1].get<double>() - doc["grid"]["extents"][0][0].get<double>();
        doc["cutoff"]["h"] = 8.0 * w / n;
      }
    } else if (axis == "cutoff.h") {
      doc["cutoff"]["h"] = value;
    }
    doc["audit"]["per_step"] = false;
    try {
      configs.push_back(RunConfig::from_json(doc));
    } catch (const std::exception& e) {
      out.exit_code = 2;
      out.message = e.what();
      return out;
    }
  }

  // fan the independent runs out concurrently; results are gathered in value
  // order so the table stays deterministic
  std::vector<std::future<PreparedRun>> futs;
  for (const auto& cfg : configs)
    futs.push_back(std::async(std::launch::async, [&cfg] { return execute(cfg); }));
  for (size_t k = 0; k < futs.size(); ++k) {
    PreparedRun pr = futs[k].get();
    if (pr.run.failed) {
      out.exit_code = 1;
      out.message = "sweep run failed at " + axis + " = " + std::to_string(values[k]) + ": " +
                    pr.run.failure;
      return out;
    }
    SweepRow row;
    row.value = values[k];
    row.steps = (int)pr.run.ledger.size();
    row.eps = pr.run.cfg.eps;
    row.mass = pr.run.ledger.empty() ? 0.0 : pr.run.ledger.back().mass;
    row.l2 = pr.run.ledger.empty() ? 0.0 : pr.run.ledger.back().l2;
    if (!pr.bv_audits.empty()) row.bv_ratio = pr.bv_audits.back().ratio;
    rows.push_back(row);
    runs.push_back(std::move(pr));
  }
  for (size_t k = 0; k + 1 < runs.size(); ++k)
    rows[k].dist_next = probe_distance(runs[k].run.cfg.grid, runs[k].run.final_u(),
                                       runs[k + 1].run.cfg.grid, runs[k + 1].run.final_u());

  const fs::path dir = resolve_out_dir(rc, out_root);
  fs::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv");
  csv << "axis,value,steps,eps,final_mass,final_l2,bv_ratio,dist_to_next\n";
  for (const auto& r : rows)
    csv << axis << ',' << fmt(r.value) << ',' << r.steps << ',' << fmt(r.eps) << ','
        << fmt(r.mass) << ',' << fmt(r.l2) << ',' << fmt(r.bv_ratio) << ','
        << fmt(r.dist_next) << '\n';
  out.artifact_dir = dir.string();
  out.exit_code = 0;
  out.message = "sweep complete (" + std::to_string(rows.size()) + " runs)";
  return out;
}

}  // namespace driftbv
