#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "wallflip/conditioned_walk.hpp"
#include "wallflip/interface_dynamics.hpp"
#include "wallflip/observables.hpp"
#include "wallflip/rng.hpp"
#include "wallflip/stats.hpp"
#include "wallflip/test_function.hpp"

namespace wallflip {
namespace {

// Exact continuum pairing of the rescaled interpolation against a smooth
// weight, with panels split at both the lattice nodes and the weight knots.
double continuum_pairing(const RescaledInterface& r, const TestFunction& phi,
                         int order) {
  std::vector<double> brk;
  for (std::size_t n = 0; n < r.g.size(); ++n)
    brk.push_back(r.eps * static_cast<double>(n));
  for (double k : phi.knots()) brk.push_back(k);
  std::sort(brk.begin(), brk.end());
  const auto f = [&](double x) {
    const double w = order == 0 ? phi(x) : phi.d2(x);
    return r(x) * w;
  };
  return integrate_gl8(f, 0.0, r.eps * static_cast<double>(r.g.size() - 1),
                       brk);
}

TEST_CASE("grid function interpolates linearly and vanishes outside") {
  GridFunction g{0.5, {0.0, 1.0, 0.5}};
  CHECK(g.x_max() == 1.0);
  CHECK(g.value(0.0) == 0.0);
  CHECK(g.value(0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.value(0.5) == 1.0);
  CHECK(g.value(0.75) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(g.value(-0.1) == 0.0);
  CHECK(g.value(1.1) == 0.0);
}

TEST_CASE("rescaling is diffusive in both axes") {
  const InterfaceState s{{0, 1, 0}};
  const RescaledInterface r = rescale(s, 0.25);
  CHECK(r.eps == 0.25);
  REQUIRE(r.g.size() == 3);
  CHECK(r.g[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r(0.125) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r(0.5) == 0.0);

  const double rho = 1.7;
  CHECK(r.weighted(0.125, rho) ==
        doctest::Approx(0.25 * std::exp(-0.125 * rho)).epsilon(1e-14));
  // the grid view bakes the weight into the nodes before interpolating
  const GridFunction g = r.grid(rho);
  CHECK(g.value(0.125) ==
        doctest::Approx(0.25 * std::exp(-0.25 * rho)).epsilon(1e-14));
  const GridFunction g2 = weighted_field(s, 0.25, rho);
  CHECK(g.values == g2.values);
  CHECK(g.spacing == g2.spacing);
}

TEST_CASE("interpolated_field blends the two endpoint profiles") {
  const std::vector<std::int32_t> a = {0, 1, 2, 1};
  const std::vector<std::int32_t> b = {0, 1, 0, 1};
  const double eps = 0.5, rho = 0.3;
  const GridFunction fa = interpolated_field(a, b, 0.0, eps, rho);
  const GridFunction fb = interpolated_field(a, b, 1.0, eps, rho);
  const GridFunction fm = interpolated_field(a, b, 0.25, eps, rho);
  const GridFunction ga = weighted_field(InterfaceState{a}, eps, rho);
  const GridFunction gb = weighted_field(InterfaceState{b}, eps, rho);
  CHECK(fa.values == ga.values);
  CHECK(fb.values == gb.values);
  for (std::size_t i = 0; i < fm.values.size(); ++i) {
    CHECK(fm.values[i] ==
          doctest::Approx(0.75 * ga.values[i] + 0.25 * gb.values[i])
              .epsilon(1e-14));
  }
}

TEST_CASE("a single flip moves every observable by its exact increment") {
  const double eps = 0.25;
  InterfaceState s{{0, 1, 2, 1, 0, 1, 2, 1}};
  validate_state(s);
  const int L = s.active_sites();
  const TestFunction phi = TestFunction::bump(0.875, 0.5);
  ScaledObservables obs(phi, eps, L);

  const double t_flip = 0.7, t_end = 1.9;
  const int site = 2;

  const auto static_sums = [&](const InterfaceState& st) {
    double lap_phi = 0.0, lap_allow = 0.0, blocked_phi = 0.0;
    double corner2 = 0.0, blocked2 = 0.0;
    for (int m = 1; m <= L; ++m) {
      const double pv = phi(eps * m);
      const int lap = discrete_laplacian(st, m);
      lap_phi += lap * pv;
      if (lap != 0) corner2 += pv * pv;
      if (is_blocked(st, m)) {
        blocked_phi += pv;
        blocked2 += pv * pv;
      } else {
        lap_allow += lap * pv;
      }
    }
    return std::vector<double>{lap_phi, lap_allow, blocked_phi, corner2,
                               blocked2};
  };
  const auto pairing = [&](const InterfaceState& st) {
    double sum = 0.0;
    for (std::size_t n = 0; n < st.h.size(); ++n)
      sum += st.h[n] * phi(eps * static_cast<double>(n));
    return std::pow(eps, 1.5) * sum;
  };

  const std::vector<double> before = static_sums(s);
  const double pair0 = pairing(s);
  const RescaledInterface r0 = rescale(s, eps);

  obs.on_interval(0.0, t_flip, s);
  FlipEvent ev;
  ev.t = t_flip;
  ev.site = site;
  ev.delta = static_cast<std::int8_t>(discrete_laplacian(s, site));
  REQUIRE(ev.delta == -2);
  REQUIRE_FALSE(is_blocked(s, site));
  ev.outcome = FlipOutcome::Flipped;
  obs.on_before(ev, s);
  s.h[site] += ev.delta;
  obs.on_after(ev, s);
  obs.on_interval(t_flip, t_end, s);

  const std::vector<double> after = static_sums(s);
  const double pair1 = pairing(s);
  const double d0 = t_flip, d1 = t_end - t_flip;
  const double e32 = std::pow(eps, 1.5);
  const double pv = phi(eps * site);

  CHECK(obs.flips() == 1);
  CHECK(obs.blocked_rings() == 0);
  CHECK(obs.pairing_eps_initial() == doctest::Approx(pair0).epsilon(1e-13));
  CHECK(obs.pairing_eps_current() == doctest::Approx(pair1).epsilon(1e-13));
  CHECK(pair1 - pair0 == doctest::Approx(-2.0 * e32 * pv).epsilon(1e-13));

  CHECK(obs.noise_jump_part() ==
        doctest::Approx(e32 / std::sqrt(2.0) * (-2.0) * pv).epsilon(1e-13));
  CHECK(obs.noise_compensator_part() ==
        doctest::Approx(-e32 / std::sqrt(2.0) *
                        (before[1] * d0 + after[1] * d1))
            .epsilon(1e-12));
  CHECK(obs.drift_integral() ==
        doctest::Approx(e32 * (before[0] * d0 + after[0] * d1)).epsilon(1e-12));
  CHECK(obs.eta_integral() ==
        doctest::Approx(2.0 * e32 * (before[2] * d0 + after[2] * d1))
            .epsilon(1e-12));
  CHECK(obs.bracket_a1() ==
        doctest::Approx(2.0 * std::pow(eps, 3.0) *
                        (before[3] * d0 + after[3] * d1))
            .epsilon(1e-12));
  CHECK(obs.bracket_a2() ==
        doctest::Approx(2.0 * std::pow(eps, 3.0) *
                        (before[4] * d0 + after[4] * d1))
            .epsilon(1e-12));

  CHECK(obs.max_jump_abs() ==
        doctest::Approx(std::sqrt(2.0) * e32 * pv).epsilon(1e-13));
  CHECK(obs.max_jump_abs() <= obs.jump_bound());

  CHECK(std::abs(obs.decomposition_residual()) <=
        1e-12 * obs.decomposition_scale());

  // continuum functionals against the quadrature oracle
  const RescaledInterface r1 = rescale(s, eps);
  CHECK(obs.pairing_continuum_initial() ==
        doctest::Approx(continuum_pairing(r0, phi, 0)).epsilon(1e-12));
  CHECK(obs.pairing_continuum_current() ==
        doctest::Approx(continuum_pairing(r1, phi, 0)).epsilon(1e-12));
  CHECK(obs.second_derivative_integral() ==
        doctest::Approx(eps * eps *
                        (continuum_pairing(r0, phi, 2) * d0 +
                         continuum_pairing(r1, phi, 2) * d1))
            .epsilon(1e-11));
  CHECK(obs.quadrature_refinement_gap() <= 1e-9);
}

TEST_CASE("a permanently blocked corner accumulates all three measures") {
  const double eps = 0.2;
  const InterfaceState s{{0, 1, 0}};
  const TestFunction phi = TestFunction::bump(eps, eps / 2.0);
  ScaledObservables obs(phi, eps, 1);
  const double T = 7.3;
  obs.on_interval(0.0, T, s);
  const double pv = phi(eps);
  CHECK(obs.bracket_a1() ==
        doctest::Approx(2.0 * std::pow(eps, 3.0) * pv * pv * T).epsilon(1e-13));
  CHECK(obs.bracket_a2() == obs.bracket_a1());
  CHECK(obs.eta_integral() ==
        doctest::Approx(2.0 * std::pow(eps, 1.5) * pv * T).epsilon(1e-13));
  CHECK(obs.noise_value() == 0.0);
  CHECK(std::abs(obs.decomposition_residual()) <=
        1e-13 * obs.decomposition_scale());
}

TEST_CASE("time clipping freezes accumulation at t_stop") {
  const double eps = 0.2;
  const InterfaceState s{{0, 1, 0}};
  const TestFunction phi = TestFunction::bump(eps, eps / 2.0);
  ScaledObservables obs(phi, eps, 1, 2.5);
  obs.on_interval(0.0, 7.0, s);
  obs.on_interval(7.0, 9.0, s);
  const double pv = phi(eps);
  CHECK(obs.bracket_a1() ==
        doctest::Approx(2.0 * std::pow(eps, 3.0) * pv * pv * 2.5)
            .epsilon(1e-13));
}

TEST_CASE("a pure staircase produces no signal at all") {
  const double eps = 0.25;
  const InterfaceState s{{0, 1, 2, 3, 4, 5}};
  const TestFunction phi = TestFunction::bump(0.625, 0.5);
  ScaledObservables obs(phi, eps, 4);
  obs.on_interval(0.0, 11.0, s);
  CHECK(obs.drift_integral() == 0.0);
  CHECK(obs.noise_value() == 0.0);
  CHECK(obs.eta_integral() == 0.0);
  CHECK(obs.bracket_a1() == 0.0);
  CHECK(obs.bracket_a2() == 0.0);
  CHECK(obs.decomposition_residual() == 0.0);
  CHECK(obs.pairing_eps_current() == obs.pairing_eps_initial());
}

TEST_CASE("live accumulation and replay agree") {
  const double eps = 0.2;
  const int L = 40;
  const TestFunction phi = TestFunction::bump(4.0, 3.0);
  RngStream rng(11011, 4);
  InterfaceState s = stationary_initial_state(L, rng);

  ScaledObservables live(phi, eps, L);
  EventHistory rec;
  LoggingPolicy log;
  log.no_corner_rings = true;
  run_until(s, 0.0, 60.0, rng, live, &rec, log);

  ScaledObservables replayed(phi, eps, L);
  rec.replay([&](double t0, double t1,
                 const InterfaceState& st) { replayed.on_interval(t0, t1, st); },
             [&](const FlipEvent& ev, const InterfaceState& st) {
               replayed.on_before(ev, st);
             },
             [&](const FlipEvent& ev, const InterfaceState& st) {
               replayed.on_after(ev, st);
             });

  CHECK(replayed.noise_value() == live.noise_value());
  CHECK(replayed.bracket_a1() == live.bracket_a1());
  CHECK(replayed.bracket_a2() == live.bracket_a2());
  CHECK(replayed.eta_integral() == live.eta_integral());
  CHECK(replayed.drift_integral() == live.drift_integral());
  CHECK(replayed.pairing_eps_current() == live.pairing_eps_current());
  CHECK(replayed.decomposition_residual() == live.decomposition_residual());

  // without NoCorner rings the span structure is coarser but the totals
  // agree to accumulation accuracy
  InterfaceState s2{rec.initial_h};
  RngStream rng2(11011, 4);
  InterfaceState s2b = stationary_initial_state(L, rng2);
  ScaledObservables live2(phi, eps, L);
  EventHistory rec2;
  run_until(s2b, 0.0, 60.0, rng2, live2, &rec2);
  ScaledObservables replayed2(phi, eps, L);
  rec2.replay([&](double t0, double t1, const InterfaceState& st) {
                replayed2.on_interval(t0, t1, st);
              },
              [&](const FlipEvent& ev, const InterfaceState& st) {
                replayed2.on_before(ev, st);
              },
              [&](const FlipEvent& ev, const InterfaceState& st) {
                replayed2.on_after(ev, st);
              });
  CHECK(replayed2.noise_value() ==
        doctest::Approx(live2.noise_value()).epsilon(1e-12));
  CHECK(replayed2.bracket_a1() ==
        doctest::Approx(live2.bracket_a1()).epsilon(1e-12));
}

TEST_CASE("random runs satisfy the pathwise decomposition and jump bound") {
  for (double eps : {0.2, 0.1}) {
    const int L = 60;
    const TestFunction phi = TestFunction::bump(0.3 * eps * L, 0.2 * eps * L);
    for (int rep = 0; rep < 15; ++rep) {
      RngStream rng(808, static_cast<std::uint64_t>(rep) + 1);
      InterfaceState s = stationary_initial_state(L, rng);
      ScaledObservables obs(phi, eps, L);
      EventHistory rec;
      run_until(s, 0.0, 1.0 / (eps * eps), rng, obs, &rec);
      CHECK(std::abs(obs.decomposition_residual()) <=
            1e-8 * obs.decomposition_scale());
      CHECK(obs.max_jump_abs() <= obs.jump_bound() * (1.0 + 1e-12));
      CHECK(obs.bracket_a2() <= obs.bracket_a1() + 1e-15);

      const ResidualResult rr = semidiscrete_residual(rec, phi, eps, 1.0);
      CHECK(rr.scale > 0.0);
      CHECK(std::abs(rr.value) <= 1e-8 * rr.scale);

      const ErrorTermResult et = error_term(rec, phi, eps, 1.0);
      CHECK(et.scale > 0.0);
      CHECK(et.quad_gap <= 1e-9);
    }
  }
}

TEST_CASE("the noise is a mean-zero martingale at fixed time") {
  const double eps = 0.2;
  const int L = 50;
  const TestFunction phi = TestFunction::bump(3.0, 2.0);
  const int reps = 400;
  std::vector<double> ws(reps);
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(909, static_cast<std::uint64_t>(rep));
    InterfaceState s = stationary_initial_state(L, rng);
    ScaledObservables obs(phi, eps, L);
    run_until(s, 0.0, 125.0, rng, obs);
    ws[static_cast<std::size_t>(rep)] = obs.noise_value();
  }
  const MeanStderr ms = mean_stderr(ws);
  CHECK(std::abs(ms.mean) < 4.0 * ms.stderr_of_mean);
}

TEST_CASE("noise path reproduces the streaming martingale value") {
  const double eps = 0.25;
  const int L = 30;
  const TestFunction phi = TestFunction::bump(2.0, 1.5);
  RngStream rng(303, 6);
  InterfaceState s = stationary_initial_state(L, rng);
  ScaledObservables obs(phi, eps, L);
  EventHistory rec;
  run_until(s, 0.0, 40.0, rng, obs, &rec);

  const DiscreteNoisePath path = noise_path(rec, phi, eps);
  CHECK(path.eps == eps);
  CHECK(path.final_value() ==
        doctest::Approx(obs.noise_value()).epsilon(1e-12));
  CHECK(path.max_jump_abs ==
        doctest::Approx(obs.max_jump_abs()).epsilon(1e-12));
  CHECK(path.value(path.t_end) ==
        doctest::Approx(path.final_value()).epsilon(1e-12));
  for (std::size_t i = 1; i < path.times.size(); ++i)
    CHECK(path.times[i] >= path.times[i - 1]);
  // before anything happens the path starts from zero
  if (!path.times.empty()) {
    CHECK(std::abs(path.value(0.0)) <= std::abs(path.comp_cumsum.front()) +
                                           1e-15);
  }
}

TEST_CASE("bracket curve is monotone and lands on the streaming totals") {
  const double eps = 0.2;
  const int L = 40;
  const TestFunction phi = TestFunction::bump(3.0, 2.0);
  RngStream rng(404, 2);
  InterfaceState s = stationary_initial_state(L, rng);
  ScaledObservables obs(phi, eps, L);
  EventHistory rec;
  run_until(s, 0.0, 50.0, rng, obs, &rec);

  const double t_full = eps * eps * 50.0;
  double prev_a1 = 0.0, prev_a2 = 0.0;
  for (double t : {0.0, 0.4, 1.0, 1.7, t_full}) {
    const BracketPair bp = bracket(rec, phi, eps, t);
    CHECK(bp.a1 >= prev_a1);
    CHECK(bp.a2 >= prev_a2);
    CHECK(bp.a2 <= bp.a1 + 1e-15);
    prev_a1 = bp.a1;
    prev_a2 = bp.a2;
  }
  const BracketPair full = bracket(rec, phi, eps, t_full);
  CHECK(full.a1 == doctest::Approx(obs.bracket_a1()).epsilon(1e-12));
  CHECK(full.a2 == doctest::Approx(obs.bracket_a2()).epsilon(1e-12));
  CHECK(bracket(rec, phi, eps, 0.0).a1 == 0.0);
}

TEST_CASE("reflection measure carries the eta mass site by site") {
  const double eps = 0.2;
  const int L = 40;
  const TestFunction phi = TestFunction::bump(3.0, 2.0);
  RngStream rng(505, 9);
  InterfaceState s = stationary_initial_state(L, rng);
  ScaledObservables obs(phi, eps, L);
  EventHistory rec;
  run_until(s, 0.0, 200.0, rng, obs, &rec);

  const ReflectionMeasure mu = reflection_measure(rec, eps);
  CHECK(mu.bin_width == doctest::Approx(eps * eps).epsilon(1e-15));
  REQUIRE(obs.blocked_rings() >= 0);

  // independent total: blocked site-time from a replay scan
  double blocked_time = 0.0;
  rec.replay(
      [&](double t0, double t1, const InterfaceState& st) {
        blocked_time +=
            (t1 - t0) * static_cast<double>(blocked_sites(st).size());
      },
      [](const FlipEvent&, const InterfaceState&) {},
      [](const FlipEvent&, const InterfaceState&) {});
  CHECK(mu.total() ==
        doctest::Approx(2.0 * std::pow(eps, 1.5) * blocked_time)
            .epsilon(1e-10));

  KahanSum paired;
  for (const auto& [key, mass] : mu.mass) {
    CHECK(mass >= 0.0);
    paired.add(mass * phi(eps * key.first));
  }
  CHECK(paired.value() == doctest::Approx(obs.eta_integral()).epsilon(1e-10));
}

TEST_CASE("support identity holds and degenerates to zero without contact") {
  const double eps = 0.2;
  const int L = 40;
  const TestFunction psi = TestFunction::bump(3.0, 2.0);
  RngStream rng(606, 3);
  InterfaceState s = stationary_initial_state(L, rng);
  EventHistory rec;
  NullObserver obs;
  run_until(s, 0.0, 150.0, rng, obs, &rec);
  const SupportIdentity si = support_identity(rec, psi, eps);
  const double scale = std::max(std::abs(si.rhs), 1e-30);
  CHECK(std::abs(si.lhs - si.rhs) <= 1e-10 * scale);

  // a staircase never touches the wall, so both sides vanish
  InterfaceState stairs{{0, 1, 2, 3, 4, 5, 6, 7}};
  EventHistory rec2;
  RngStream rng2(607, 1);
  run_until(stairs, 0.0, 0.5, rng2, obs, &rec2);
  bool any_blocked = false;
  for (const FlipEvent& ev : rec2.events)
    any_blocked = any_blocked || ev.outcome == FlipOutcome::Blocked;
  if (!any_blocked && rec2.events.empty()) {
    const SupportIdentity z = support_identity(rec2, psi, eps);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
  }
}

TEST_CASE("interpolation gap vanishes without events and is exact for one flip") {
  const double eps = 0.16;
  EventHistory still;
  still.initial_h = {0, 1, 2, 3, 2, 1, 0, 1};
  still.t_begin = 0.0;
  still.t_end = 5.0;
  CHECK(interpolation_gap(still, eps, 0.7) == 0.0);

  EventHistory one;
  one.initial_h = {0, 1, 2, 1, 0, 1, 0, 1};
  one.t_begin = 0.0;
  one.t_end = 2.0;
  FlipEvent ev;
  ev.t = 1.0;
  ev.site = 2;
  ev.delta = -2;
  ev.outcome = FlipOutcome::Flipped;
  one.events.push_back(ev);
  for (double rho : {0.0, 1.3}) {
    const double expected =
        2.0 * std::sqrt(eps) * std::exp(-rho * eps * 2.0);
    CHECK(interpolation_gap(one, eps, rho) ==
          doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("increment scaling recovers a synthetic growth exponent") {
  GridFunction base{0.1, std::vector<double>(32, 0.0)};
  for (std::size_t i = 1; i < 31; ++i)
    base.values[i] = std::sin(0.2 * static_cast<double>(i));
  GridFunction bump_shape{0.1, std::vector<double>(32, 0.0)};
  for (std::size_t i = 1; i < 31; ++i) {
    const double x = 0.1 * static_cast<double>(i);
    bump_shape.values[i] = x * std::exp(-x);
  }
  const std::vector<double> lags = {0.01, 0.04, 0.16};
  const double alpha = 0.4;
  std::vector<std::vector<GridFunction>> fields(3);
  for (auto& snaps : fields) {
    snaps.push_back(base);
    for (double lag : lags) {
      GridFunction g = base;
      for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] += std::pow(lag, alpha) * bump_shape.values[i];
      snaps.push_back(g);
    }
  }
  const IncrementScalingResult res = increment_scaling(fields, lags, 1.0, 0.0);
  REQUIRE(res.points.size() == 3);
  CHECK(res.fit.slope == doctest::Approx(alpha).epsilon(1e-9));

  std::vector<std::vector<GridFunction>> broken = fields;
  broken[1].pop_back();
  CHECK_THROWS_AS(increment_scaling(broken, lags, 1.0, 0.0),
                  std::invalid_argument);
}

}  // namespace
}  // namespace wallflip
