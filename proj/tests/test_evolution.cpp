#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "driftbv/evolution.hpp"

using namespace driftbv;

namespace {

constexpr double kPi = 3.14159265358979323846;

EvolutionConfig base_config_1d(int n, const std::vector<std::string>& dir,
                               const std::vector<std::string>& neu) {
  EvolutionConfig cfg;
  cfg.grid = build_grid(1, {0.0, 0.0}, {1.0, 1.0}, {n, 1}, dir, neu);
  cfg.graph = MonotoneGraph::identity();
  cfg.drift = DriftField::zero(1);
  cfg.source = ScalarField::zero(1);
  cfg.initial = ScalarField::zero(1);
  cfg.T = 0.2;
  cfg.eps_requested = 0.02;
  return cfg;
}

}  // namespace

TEST_CASE("eps is adjusted downward to divide T") {
  EvolutionConfig cfg = base_config_1d(16, {"all"}, {});
  cfg.T = 1.0;
  cfg.eps_requested = 0.3;
  cfg.finalize();
  CHECK(cfg.n_steps == 4);
  CHECK(cfg.eps == doctest::Approx(0.25));
  CHECK(cfg.eps_adjusted);
  CHECK(cfg.delta_used == doctest::Approx(0.25));  // default delta = eps

  cfg.eps_requested = 0.25;
  cfg.n_steps = 0;
  cfg.finalize();
  CHECK(!cfg.eps_adjusted);
}

TEST_CASE("constant state is preserved on all-Neumann with no drift") {
  EvolutionConfig cfg = base_config_1d(24, {}, {"all"});
  cfg.graph = MonotoneGraph::power_law(2.0);
  cfg.initial = ScalarField::constant(1, 0.7);
  cfg.finalize();
  auto r = run(cfg);
  CHECK(!r.failed);
  for (const auto& snap : r.u_snaps)
    for (double u : snap) CHECK(u == doctest::Approx(0.7).epsilon(1e-11));
}

TEST_CASE("one step is the backward Euler heat step on eigenvectors") {
  const int n = 32;
  EvolutionConfig cfg = base_config_1d(n, {"all"}, {});
  cfg.delta = 0.1;
  cfg.finalize();
  const double h = cfg.grid.h[0];
  const double mu1 = (2.0 - 2.0 * std::cos(kPi * h)) / (h * h);

  std::vector<double> u_prev(n);
  for (int c = 0; c < n; ++c) u_prev[c] = std::sin(kPi * cfg.grid.center(c)[0]);
  auto step = euler_step(u_prev, 0.0, 0, cfg);
  const double decay = 1.0 / (1.0 + cfg.eps * (1.0 + cfg.delta) * mu1);
  for (int c = 0; c < n; ++c)
    CHECK(step.u[c] == doctest::Approx(u_prev[c] * decay).epsilon(1e-9));
}

TEST_CASE("positivity is preserved") {
  EvolutionConfig cfg = base_config_1d(40, {"all"}, {});
  cfg.graph = MonotoneGraph::sign();
  cfg.initial = ScalarField::bump(1, {0.4, 0}, 0.3, 0.9);
  cfg.source = ScalarField::bump(1, {0.7, 0}, 0.15, 0.3);
  cfg.finalize();
  auto r = run(cfg);
  CHECK(!r.failed);
  for (const auto& snap : r.u_snaps)
    for (double u : snap) CHECK(u >= -1e-12);
}

TEST_CASE("runs are deterministic") {
  EvolutionConfig cfg = base_config_1d(32, {"left"}, {"right"});
  cfg.graph = MonotoneGraph::power_law(2.0);
  cfg.initial = ScalarField::bump(1, {0.5, 0}, 0.3, 1.0);
  cfg.finalize();
  auto r1 = run(cfg);
  auto r2 = run(cfg);
  REQUIRE(r1.u_snaps.size() == r2.u_snaps.size());
  for (size_t s = 0; s < r1.u_snaps.size(); ++s)
    for (size_t c = 0; c < r1.u_snaps[s].size(); ++c) {
      CHECK(r1.u_snaps[s][c] == r2.u_snaps[s][c]);  // bitwise
      CHECK(r1.p_snaps[s][c] == r2.p_snaps[s][c]);
    }
}

TEST_CASE("interpolants") {
  EvolutionConfig cfg = base_config_1d(16, {"all"}, {});
  cfg.initial = ScalarField::bump(1, {0.5, 0}, 0.4, 1.0);
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  const double eps = cfg.eps;

  // linear interpolant hits the snapshots
  for (int i : {0, 3, 7}) {
    auto ui = interpolant_eval(r, i * eps, InterpKind::Linear);
    for (size_t c = 0; c < ui.size(); ++c)
      CHECK(ui[c] == doctest::Approx(r.u_snaps[i][c]).epsilon(1e-13));
  }
  // midpoint is the arithmetic mean
  auto mid = interpolant_eval(r, 2.5 * eps, InterpKind::Linear);
  for (size_t c = 0; c < mid.size(); ++c)
    CHECK(mid[c] ==
          doctest::Approx(0.5 * (r.u_snaps[2][c] + r.u_snaps[3][c])).epsilon(1e-12));
  // piecewise-constant takes the right endpoint
  auto pc = interpolant_eval(r, 2.5 * eps, InterpKind::PiecewiseConstant);
  for (size_t c = 0; c < pc.size(); ++c) CHECK(pc[c] == r.u_snaps[3][c]);

  CHECK_THROWS_AS(interpolant_eval(r, -0.1, InterpKind::Linear), TimeOutOfRange);
  CHECK_THROWS_AS(interpolant_eval(r, cfg.T, InterpKind::Linear), TimeOutOfRange);
}

TEST_CASE("mass balance with sources on a closed box") {
  EvolutionConfig cfg = base_config_1d(32, {}, {"all"});
  cfg.graph = MonotoneGraph::power_law(2.0);
  cfg.initial = ScalarField::bump(1, {0.5, 0}, 0.3, 1.0);
  cfg.source = ScalarField::bump(1, {0.3, 0}, 0.2, 0.5);
  cfg.solver.newton_tol = 1e-14;  // conservation holds to the solver residual
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  const double vol = cfg.grid.cell_volume();
  double mass_prev = 0.0;
  for (double u : cfg.u0) mass_prev += vol * u;
  AveragedSample f_unused = time_average(DriftField::zero(1), 0.0, 1.0, cfg.grid);
  (void)f_unused;
  for (size_t s = 1; s < r.u_snaps.size(); ++s) {
    const auto& e = r.ledger[r.snap_steps[s] - 1];
    // per-step: mass gain equals eps * integral of f_i
    std::vector<double> fi = time_average_scalar(cfg.source, (e.step - 1) * cfg.eps,
                                                 e.step * cfg.eps, cfg.grid);
    double fmass = 0.0;
    for (double v : fi) fmass += vol * v;
    CHECK(e.mass - mass_prev == doctest::Approx(cfg.eps * fmass).epsilon(1e-11));
    mass_prev = e.mass;
  }
}

TEST_CASE("mass balance with a time-dependent source") {
  EvolutionConfig cfg = base_config_1d(32, {}, {"all"});
  cfg.initial = ScalarField::constant(1, 0.2);
  cfg.source = ScalarField::bump(1, {0.5, 0}, 0.25, 1.0);
  cfg.source.time_poly = {{1.0, 0, 0, 2}};  // f scaled by t^2
  cfg.solver.newton_tol = 1e-14;
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  const double vol = cfg.grid.cell_volume();
  double expected = 0.0;
  for (double u : cfg.u0) expected += vol * u;
  for (const auto& e : r.ledger) {
    std::vector<double> fi =
        time_average_scalar(cfg.source, (e.step - 1) * cfg.eps, e.step * cfg.eps, cfg.grid);
    for (double fv : fi) expected += cfg.eps * vol * fv;
    CHECK(e.mass == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("discrete Lq bounds hold per step") {
  EvolutionConfig cfg = base_config_1d(48, {"right"}, {"left"});
  // compressive drift: V = -0.5(x - 1/2) wait-outward on right only; use x^2
  std::array<std::vector<PolyTerm>, 2> comps;
  comps[0] = {{1.0, 2, 0, 0}};
  cfg.drift = DriftField::polynomial(1, comps);
  cfg.graph = MonotoneGraph::sign();
  cfg.initial = ScalarField::bump(1, {0.4, 0}, 0.25, 0.9);
  cfg.source = ScalarField::bump(1, {0.3, 0}, 0.1, 0.4);
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  for (const auto& e : r.ledger) {
    for (double q : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
      const double norm = std::isinf(q) ? e.linf : (q == 1.0 ? e.l1 : e.l2);
      CHECK(norm <= mq_eps_product_bound(r, q, e.step) * (1.0 + 1e-8));
      // the exponential Gronwall form majorizes the product here (div^- = 0)
      CHECK(norm <= mq_eps_bound(r, q, e.step) * (1.0 + 1e-8));
    }
    CHECK(e.energy_ok);
    for (const auto& a : e.audits) CHECK(a.pass);
  }
}

TEST_CASE("mq_bound closed forms") {
  // V divergence-free, f = 0: M_q(t) = ||u0||_q for all t
  EvolutionConfig cfg = base_config_1d(32, {"all"}, {});
  cfg.initial = ScalarField::bump(1, {0.5, 0}, 0.4, 1.0);
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  double u0_l2 = 0.0;
  for (double u : cfg.u0) u0_l2 += u * u * cfg.grid.cell_volume();
  u0_l2 = std::sqrt(u0_l2);
  CHECK(mq_bound(r, 2.0, cfg.T) == doctest::Approx(u0_l2).epsilon(1e-12));

  // q = 1: the exponential factor is exactly 1 regardless of V
  EvolutionConfig cfg2 = base_config_1d(32, {"all"}, {});
  cfg2.drift = DriftField::radial(1, {0.5, 0.0}, -0.8);  // div = -0.8 < 0
  cfg2.eps_requested = 0.01;
  cfg2.initial = ScalarField::bump(1, {0.5, 0}, 0.3, 1.0);
  cfg2.finalize();
  auto r2 = run(cfg2);
  REQUIRE(!r2.failed);
  double u0_l1 = 0.0, u0_l2b = 0.0;
  for (double u : cfg2.u0) {
    u0_l1 += std::fabs(u) * cfg2.grid.cell_volume();
    u0_l2b += u * u * cfg2.grid.cell_volume();
  }
  u0_l2b = std::sqrt(u0_l2b);
  CHECK(mq_bound(r2, 1.0, cfg2.T) == doctest::Approx(u0_l1).epsilon(1e-12));
  // q = 2 with div = -0.8 gains e^{0.8 t}
  CHECK(mq_bound(r2, 2.0, cfg2.T) ==
        doctest::Approx(std::exp(0.8 * cfg2.T) * u0_l2b).epsilon(1e-9));
}

TEST_CASE("transport mode conserves mass until outflow activates") {
  EvolutionConfig cfg = base_config_1d(64, {"all"}, {});
  cfg.graph = MonotoneGraph::transport_zero();
  cfg.drift = DriftField::constant(1, {1.0, 0.0});
  cfg.initial = ScalarField::indicator(1, {0.1, 0}, {0.3, 0}, 1.0);
  cfg.T = 0.1;
  cfg.eps_requested = 0.01;
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  double mass0 = 0.0;
  for (double u : cfg.u0) mass0 += u * cfg.grid.cell_volume();
  for (const auto& e : r.ledger) CHECK(e.mass <= mass0 * (1.0 + 1e-12));
}

TEST_CASE("2D Hele-Shaw run with mixed boundaries and drift") {
  // saturated and mushy regions coexist; Newton must track the free boundary
  EvolutionConfig cfg;
  cfg.grid = build_grid(2, {0.0, 0.0}, {1.0, 1.0}, {28, 28}, {"right", "top"},
                        {"left", "bottom"});
  cfg.graph = MonotoneGraph::sign();
  // wall-compatible drift: vanishes on every wall
  std::array<std::vector<PolyTerm>, 2> comps;
  comps[0] = {{4.0, 1, 0, 0}, {-4.0, 2, 0, 0}};  // 4x(1-x)
  comps[1] = {{4.0, 0, 1, 0}, {-4.0, 0, 2, 0}};  // 4y(1-y)
  cfg.drift = DriftField::polynomial(2, comps);
  cfg.source = ScalarField::bump(2, {0.35, 0.35}, 0.2, 0.5);
  cfg.initial = ScalarField::bump(2, {0.5, 0.5}, 0.35, 0.95);
  cfg.T = 0.1;
  cfg.eps_requested = 0.01;
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  for (const auto& e : r.ledger) {
    CHECK(e.linf <= 1.0 + 1e-10);  // sign-graph range cap
    CHECK(e.energy_ok);
    for (const auto& a : e.audits) CHECK(a.pass);
  }
  for (double u : r.final_u()) CHECK(u >= -1e-10);
}

TEST_CASE("2D Stefan run with mixed boundaries stays within bounds") {
  EvolutionConfig cfg;
  cfg.grid = build_grid(2, {0.0, 0.0}, {1.0, 1.0}, {24, 24}, {"left", "right"},
                        {"bottom", "top"});
  cfg.graph = MonotoneGraph::stefan(1.0);
  cfg.drift = DriftField::rotation({0.5, 0.5}, 0.8, 0.25, 0.45);
  cfg.source = ScalarField::zero(2);
  cfg.initial = ScalarField::bump(2, {0.55, 0.5}, 0.2, 1.6);  // crosses the latent jump
  cfg.T = 0.1;
  cfg.eps_requested = 0.02;
  cfg.finalize();
  auto r = run(cfg);
  REQUIRE(!r.failed);
  for (const auto& e : r.ledger) {
    CHECK(e.energy_ok);
    CHECK(e.linf <= mq_eps_bound(r, std::numeric_limits<double>::infinity(), e.step) *
                        (1.0 + 1e-6));
    for (const auto& a : e.audits) CHECK(a.pass);
  }
  for (double u : r.final_u()) CHECK(u >= -1e-10);
}

TEST_CASE("failing step keeps the partial run") {
  EvolutionConfig cfg = base_config_1d(16, {"all"}, {});
  cfg.drift = DriftField::radial(1, {0.5, 0.0}, -30.0);  // lambda0 = 1/30
  cfg.T = 1.0;
  cfg.eps_requested = 0.25;  // violates the guard immediately
  cfg.initial = ScalarField::constant(1, 0.5);
  cfg.finalize();
  auto r = run(cfg);
  CHECK(r.failed);
  CHECK(r.failed_step == 0);
  CHECK(r.u_snaps.size() == 1);  // initial snapshot retained for post-mortem
}

TEST_CASE("delta refinement study") {
  EvolutionConfig cfg = base_config_1d(40, {"all"}, {});
  cfg.graph = MonotoneGraph::identity();
  cfg.initial = ScalarField::bump(1, {0.5, 0}, 0.3, 1.0);
  cfg.T = 0.1;
  cfg.eps_requested = 0.02;
  cfg.finalize();

  bool monotone = false;
  auto rows = delta_refinement_study(cfg, {1e-1, 5e-2, 2.5e-2, 1.25e-2}, &monotone);
  REQUIRE(rows.size() == 3);
  CHECK(monotone);
  // identity graph: beta_delta differs from beta by the 1/(1+delta) factor,
  // so distances shrink linearly in delta
  CHECK(rows[0].u_dist / rows[1].u_dist == doctest::Approx(2.0).epsilon(0.25));
  CHECK(rows[1].u_dist / rows[2].u_dist == doctest::Approx(2.0).epsilon(0.25));

  // TransportZero ignores delta entirely
  EvolutionConfig tz = cfg;
  tz.graph = MonotoneGraph::transport_zero();
  tz.drift = DriftField::constant(1, {0.5, 0.0});
  auto rows_tz = delta_refinement_study(tz, {1e-1, 1e-2}, nullptr);
  CHECK(rows_tz[0].u_dist == 0.0);
  CHECK(rows_tz[0].p_dist == 0.0);

  CHECK_THROWS_AS(delta_refinement_study(cfg, {1e-1}, nullptr), InvalidInput);
  CHECK_THROWS_AS(delta_refinement_study(cfg, {1e-2, 1e-1}, nullptr), InvalidInput);
}
