#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "driftbv/analysis.hpp"

using namespace driftbv;

namespace {

constexpr double kPi = 3.14159265358979323846;

Grid grid1d(int n, const std::vector<std::string>& dir = {"all"},
            const std::vector<std::string>& neu = {}) {
  return build_grid(1, {0.0, 0.0}, {1.0, 1.0}, {n, 1}, dir, neu);
}

}  // namespace

TEST_CASE("lq_norm") {
  Grid g = grid1d(100);
  std::vector<double> c(g.cell_count(), -0.7);
  for (double q : {1.0, 2.0, 5.0}) CHECK(lq_norm(c, g, q) == doctest::Approx(0.7));
  CHECK(lq_norm(c, g, std::numeric_limits<double>::infinity()) == doctest::Approx(0.7));

  std::vector<double> ind(g.cell_count(), 0.0);
  for (int i = 0; i < 50; ++i) ind[i] = 1.0;
  CHECK(lq_norm(ind, g, 1.0) == doctest::Approx(0.5));

  Grid gf = grid1d(1000);
  std::vector<double> s(gf.cell_count());
  for (int i = 0; i < gf.cell_count(); ++i) s[i] = std::sin(kPi * gf.center(i)[0]);
  CHECK(std::fabs(lq_norm(s, gf, 2.0) - std::sqrt(0.5)) <= 1e-5);

  CHECK_THROWS_AS(lq_norm(c, g, 0.5), InvalidInput);
  CHECK_THROWS_AS(lq_norm(std::vector<double>(3, 0.0), g, 2.0), GridMismatch);
}

TEST_CASE("directional_tv basics") {
  Grid g = grid1d(100);
  std::vector<double> c(g.cell_count(), 3.2);
  CHECK(directional_tv(c, g, 0) == 0.0);

  // indicator of [0.5, 1] aligned to a face: a single jump of height 1
  std::vector<double> ind(g.cell_count(), 0.0);
  for (int i = 50; i < 100; ++i) ind[i] = 1.0;
  CHECK(directional_tv(ind, g, 0) == doctest::Approx(1.0));

  // u(x) = x telescopes to (n-1)/n
  std::vector<double> lin(g.cell_count());
  for (int i = 0; i < 100; ++i) lin[i] = g.center(i)[0];
  CHECK(directional_tv(lin, g, 0) == doctest::Approx(99.0 / 100.0).epsilon(1e-12));

  CHECK_THROWS_AS(directional_tv(std::vector<double>(5, 0.0), g, 0), GridMismatch);
  CHECK_THROWS_AS(directional_tv(c, g, 1), InvalidInput);  // no y axis in 1D
}

TEST_CASE("tv subadditivity, homogeneity and weight consistency") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Grid g = build_grid(2, {0.0, 0.0}, {1.0, 1.0}, {24, 24}, {"all"}, {});
  const int nc = g.cell_count();
  std::vector<double> a(nc), b(nc), ab(nc), ones(nc, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    for (int c = 0; c < nc; ++c) {
      a[c] = unif(rng);
      b[c] = unif(rng);
      ab[c] = a[c] + b[c];
    }
    const double s = 0.5 + unif(rng) * 0.4;
    for (int axis = 0; axis < 2; ++axis) {
      const double tva = directional_tv(a, g, axis);
      const double tvb = directional_tv(b, g, axis);
      CHECK(directional_tv(ab, g, axis) <= tva + tvb + 1e-12);
      std::vector<double> sa(nc);
      for (int c = 0; c < nc; ++c) sa[c] = s * a[c];
      CHECK(directional_tv(sa, g, axis) == doctest::Approx(std::fabs(s) * tva).epsilon(1e-12));
      CHECK(directional_tv(a, g, axis, &ones) == doctest::Approx(tva).epsilon(1e-14));
    }
  }
}

TEST_CASE("pure diffusion in 1D is TVD for every graph") {
  for (const auto& graph : {MonotoneGraph::identity(), MonotoneGraph::power_law(2.0),
                            MonotoneGraph::sign(), MonotoneGraph::stefan(1.0)}) {
    EvolutionConfig cfg;
    cfg.grid = grid1d(60, {}, {"all"});
    cfg.graph = graph;
    cfg.drift = DriftField::zero(1);
    cfg.source = ScalarField::zero(1);
    cfg.initial = ScalarField::indicator(1, {0.2, 0}, {0.55, 0}, 0.9);
    cfg.T = 0.1;
    cfg.eps_requested = 0.01;
    cfg.finalize();
    auto r = run(cfg);
    REQUIRE(!r.failed);
    double prev = directional_tv(r.u_snaps[0], cfg.grid, 0);
    for (size_t s = 1; s < r.u_snaps.size(); ++s) {
      const double tv = directional_tv(r.u_snaps[s], cfg.grid, 0);
      CHECK(tv <= prev + 1e-12);
      prev = tv;
    }
  }
}

TEST_CASE("stationary BV audit") {
  Grid g = grid1d(256);
  Cutoff cut = build_cutoff(g, build_eta(8.0 / 256));
  RegularizedGraph rg(MonotoneGraph::identity(), 0.05);

  // constant source, no drift: v constant, lhs = 0
  {
    auto vs = time_average(DriftField::zero(1), 0.0, 1.0, g);
    Grid gn = grid1d(256, {}, {"all"});
    auto vs_n = time_average(DriftField::zero(1), 0.0, 1.0, gn);
    Cutoff cut_n = build_cutoff(gn, build_eta(8.0 / 256));
    StationaryProblem pb(gn, 0.05, rg, vs_n, std::vector<double>(gn.cell_count(), 0.4));
    auto sol = solve_stationary(pb);
    auto rec = verify_bv_stationary(sol, pb, cut_n);
    CHECK(rec.status == AuditStatus::Pass);
    CHECK(rec.lhs <= 1e-10);
  }

  // V = 0, randomized piecewise-smooth source: audit both sides directly
  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto vs = time_average(DriftField::zero(1), 0.0, 1.0, g);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> f(g.cell_count());
      const double edge = 0.3 + 0.4 * unif(rng);
      for (int c = 0; c < g.cell_count(); ++c) {
        const double x = g.center(c)[0];
        f[c] = 0.5 * std::sin(2.0 * kPi * x * (1.0 + trial)) + (x > edge ? 0.7 : 0.0);
      }
      StationaryProblem pb(g, 0.05, rg, vs, f);
      auto sol = solve_stationary(pb);
      auto rec = verify_bv_stationary(sol, pb, cut);
      CHECK(rec.status != AuditStatus::Fail);
    }
  }

  // adverse drift (inflow along the entire left shell) is rejected
  {
    auto vs_in = time_average(DriftField::constant(1, {1.0, 0.0}), 0.0, 1.0, g);
    StationaryProblem pb(g, 0.05, rg, vs_in, std::vector<double>(g.cell_count(), 0.2));
    auto sol = solve_stationary(pb);
    CHECK_THROWS_AS(verify_bv_stationary(sol, pb, cut), CutoffRejected);
  }

  // lambda >= lambda1 violates the audit precondition
  {
    auto vs2 = time_average(DriftField::radial(1, {0.5, 0.0}, 2.0), 0.0, 1.0, g);
    StationaryProblem pb(g, 0.6, rg, vs2, std::vector<double>(g.cell_count(), 0.1));
    auto sol = solve_stationary(pb);
    CHECK_THROWS_AS(verify_bv_stationary(sol, pb, cut), StepTooLarge);
  }
}

TEST_CASE("stationary BV audit in 2D with outward drift") {
  Grid g = build_grid(2, {0.0, 0.0}, {1.0, 1.0}, {64, 64}, {"all"}, {});
  Cutoff cut = build_cutoff(g, build_eta(0.125));
  auto vs = time_average(DriftField::radial(2, {0.5, 0.5}, 1.0), 0.0, 1.0, g);
  RegularizedGraph rg(MonotoneGraph::identity(), 0.05);
  std::vector<double> f(g.cell_count());
  ScalarField bump = ScalarField::bump(2, {0.45, 0.55}, 0.3, 1.0);
  for (int c = 0; c < g.cell_count(); ++c) {
    const auto x = g.center(c);
    f[c] = bump.eval(0.0, x) + (x[0] > 0.6 ? 0.4 : 0.0);
  }
  for (double lam : {0.02, 0.1, 0.3}) {
    StationaryProblem pb(g, lam, rg, vs, f);
    auto sol = solve_stationary(pb);
    auto rec = verify_bv_stationary(sol, pb, cut);
    CHECK(rec.status == AuditStatus::Pass);
    CHECK(rec.ratio <= 0.5);
  }
}

TEST_CASE("evolution BV audit on diffusion reduces to the TVD bound") {
  EvolutionConfig cfg;
  cfg.grid = grid1d(256);
  cfg.graph = MonotoneGraph::identity();
  cfg.drift = DriftField::zero(1);
  cfg.source = ScalarField::zero(1);
  cfg.initial = ScalarField::indicator(1, {0.3, 0}, {0.7, 0}, 1.0);
  cfg.T = 0.25;
  cfg.eps_requested = 1.0 / 64;
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  Cutoff cut = build_cutoff(cfg.grid, build_eta(8.0 / 256));
  auto recs = verify_bv_evolution(r, cut);
  REQUIRE(recs.size() == (size_t)cfg.n_steps);
  const double tv0 = directional_tv(cfg.u0, cfg.grid, 0, &cut.omega);
  for (const auto& rec : recs) {
    CHECK(rec.status == AuditStatus::Pass);
    CHECK(rec.lhs <= tv0 * (1.0 + 1e-10));  // f = 0, V = 0: weighted TVD
    CHECK(rec.gronwall_factor == doctest::Approx(1.0));
  }
}

TEST_CASE("evolution BV audit requires per-step snapshots") {
  EvolutionConfig cfg;
  cfg.grid = grid1d(256);
  cfg.graph = MonotoneGraph::identity();
  cfg.drift = DriftField::zero(1);
  cfg.source = ScalarField::zero(1);
  cfg.initial = ScalarField::bump(1, {0.5, 0}, 0.3, 1.0);
  cfg.T = 0.2;
  cfg.eps_requested = 0.02;
  cfg.snapshot_stride = 3;
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  Cutoff cut = build_cutoff(cfg.grid, build_eta(8.0 / 256));
  CHECK_THROWS_AS(verify_bv_evolution(r, cut), InvalidInput);
}

TEST_CASE("characteristics oracle") {
  Grid g = build_grid(2, {0.0, 0.0}, {1.0, 1.0}, {64, 64}, {"all"}, {});
  ScalarField u0 = ScalarField::bump(2, {0.7, 0.5}, 0.1, 1.0);

  // t = 0 and V = 0 reproduce the initial datum exactly
  auto at0 = characteristics_oracle(DriftField::rotation({0.5, 0.5}, 1.0), u0, 0.0, g);
  auto still = characteristics_oracle(DriftField::zero(2), u0, 0.7, g);
  for (int c = 0; c < g.cell_count(); ++c) {
    CHECK(at0[c] == doctest::Approx(u0.eval(0.0, g.center(c))));
    CHECK(still[c] == doctest::Approx(u0.eval(0.0, g.center(c))));
  }

  // quarter rotation maps the bump (0.7, 0.5) -> (0.5, 0.7)
  auto quarter =
      characteristics_oracle(DriftField::rotation({0.5, 0.5}, 1.0), u0, kPi / 2, g);
  ScalarField rotated = ScalarField::bump(2, {0.5, 0.7}, 0.1, 1.0);
  double err = 0.0;
  for (int c = 0; c < g.cell_count(); ++c)
    err = std::max(err, std::fabs(quarter[c] - rotated.eval(0.0, g.center(c))));
  CHECK(err <= 1e-6);

  // full revolution returns the datum (round-trip self-consistency)
  auto full = characteristics_oracle(DriftField::rotation({0.5, 0.5}, 1.0), u0, 2 * kPi, g);
  err = 0.0;
  for (int c = 0; c < g.cell_count(); ++c)
    err = std::max(err, std::fabs(full[c] - u0.eval(0.0, g.center(c))));
  CHECK(err <= 1e-6);

  // divergent fields are rejected
  CHECK_THROWS_AS(characteristics_oracle(DriftField::radial(2, {0.5, 0.5}, 1.0), u0, 0.5, g),
                  OracleInapplicable);
}

TEST_CASE("report aggregation") {
  EvolutionConfig cfg;
  cfg.grid = grid1d(32);
  cfg.graph = MonotoneGraph::identity();
  cfg.drift = DriftField::zero(1);
  cfg.source = ScalarField::zero(1);
  cfg.initial = ScalarField::bump(1, {0.5, 0}, 0.3, 1.0);
  cfg.T = 0.1;
  cfg.eps_requested = 0.02;
  cfg.audit_per_step = false;
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);

  auto rep = build_report(r, {});
  CHECK(rep.audits_total == 0);  // empty audit set: zero rows
  CHECK(rep.mq_curve.size() == r.u_snaps.size());
  CHECK(rep.energy_budget_available);  // Dirichlet walls present
  for (const auto& row : rep.energy_budget) CHECK(row.ok);
  for (const auto& pt : rep.mq_curve) {
    CHECK(pt.norm_l2 <= pt.bound_l2 * (1.0 + 1e-9));
    CHECK(pt.norm_l1 <= pt.bound_l1 * (1.0 + 1e-9));
  }

  // all-Neumann: the Poincare-based budget is skipped, not faked
  EvolutionConfig cfg2 = cfg;
  cfg2.grid = grid1d(32, {}, {"all"});
  cfg2.n_steps = 0;
  cfg2.finalize();
  auto r2 = run(cfg2);
  auto rep2 = build_report(r2, {});
  CHECK(!rep2.energy_budget_available);
  CHECK(rep2.energy_budget.empty());
}
