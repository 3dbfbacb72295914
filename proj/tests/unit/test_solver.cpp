#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hjm/deflator.hpp"
#include "hjm/errors.hpp"
#include "hjm/solver.hpp"

using namespace hjm;

namespace {

ModelSpec vasicek(std::size_t m, std::size_t d, double c, double delta, double rate) {
  ModelSpec s = zero_spec(m, d, rate);
  std::vector<std::vector<double>> scale(m + 1, std::vector<double>(d));
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t f = 0; f < d; ++f) scale[i][f] = c * (1.0 + 0.3 * static_cast<double>(i + f));
  s.beta = Volatility::vasicek_exp(scale, std::vector<double>(m + 1, delta));
  return s;
}

// real-world, two factors, jumps in curves and spots
ModelSpec jumpy(bool atomic) {
  ModelSpec s = vasicek(2, 2, 0.01, -0.8, 0.03);
  s.market.lambda = {TimeFunction::constant(0.2), TimeFunction::constant(-0.1)};
  s.market.psi = MarkFunction::constant(-0.2);
  s.market.Lambda_bound = 0.2;
  s.jumps = atomic ? JumpMeasure::atomic({{0.5, 1.0}, {-0.3, 2.0}}) : JumpMeasure::truncated_exponential(3.0, 2.0, 1.5, 16);
  s.gamma = JumpVolatility::exponential({0.004, 0.006, 0.005}, {-1.0, -1.2, -0.9});
  for (std::size_t i = 1; i <= 2; ++i) {
    s.spots[i].b = {TimeFunction::constant(0.1 * static_cast<double>(i)), TimeFunction::constant(0.05)};
    s.spots[i].c = MarkFunction::affine(0.02, 0.1);
  }
  s.initial_curves = {InitialCurve::flat(0.03), InitialCurve::linear(0.035, 0.002), InitialCurve::exponential(0.04, -0.01, 0.5)};
  s.initial_spots = {1.0, 1.2, 0.8};
  return s;
}

SimulationConfig small_cfg(std::size_t paths, double dt, double horizon_t, double horizon_xi) {
  SimulationConfig c;
  c.grid = {dt, horizon_t, horizon_xi, 0.0};
  c.n_paths = paths;
  c.seed = 7;
  c.maturities = {horizon_t, horizon_t + 0.5, horizon_xi};
  c.record_every = 5;
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("zero coefficients leave a flat curve flat and grow the numeraire at r") {
  ModelSpec s = zero_spec(2, 1, 0.04);
  PathState st = initial_state(s, {0.01, 1.0, 3.0, 0.0});
  for (int k = 0; k < 100; ++k) st = euler_step(st, 0.01, {{0.37}, {}}, s);
  for (std::size_t i = 0; i < 3; ++i)
    for (double v : st.family[i].values()) CHECK(v == doctest::Approx(0.04).epsilon(1e-14));
  CHECK(st.family.horizon() == doctest::Approx(2.0));
  CHECK(st.spots[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(st.numeraire == doctest::Approx(std::exp(0.04)).epsilon(1e-13));
  CHECK(st.deflator == 1.0);
}

TEST_CASE("a linear curve is transported by the shift") {
  ModelSpec s = zero_spec(0, 1, 0.0);
  s.initial_curves = {InitialCurve::linear(0.01, 0.02)};
  PathState st = initial_state(s, {0.01, 1.0, 3.0, 0.0});
  for (int k = 0; k < 50; ++k) st = euler_step(st, 0.01, {{0.0}, {}}, s);
  for (double xi : {0.0, 0.37, 1.2, 2.5})
    CHECK(eval(st.family[0], xi) == doctest::Approx(0.01 + 0.02 * (xi + 0.5)).epsilon(1e-12));
}

TEST_CASE("bond prices") {
  const Curve flat = Curve::constant(0.05, 0.01, 500);
  CHECK(bond_price(flat, 0.0) == 1.0);
  CHECK(bond_price(flat, 2.0) == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
  CHECK_THROWS_AS(bond_price(flat, -0.1), DomainError);
  CHECK_THROWS_AS(bond_price(flat, 5.5), DomainError);
}

TEST_CASE("step contract violations") {
  ModelSpec s = zero_spec(1, 1, 0.02);
  PathState st = initial_state(s, {0.01, 1.0, 0.02, 0.0});
  CHECK_THROWS_AS(euler_step(st, 0.02, {{0.0}, {}}, s), GridError);
  st = euler_step(st, 0.01, {{0.0}, {}}, s);
  st = euler_step(st, 0.01, {{0.0}, {}}, s);
  CHECK_THROWS_AS(euler_step(st, 0.01, {{0.0}, {}}, s), GridError);

  ModelSpec big = zero_spec(1, 1, 0.02);
  big.spots[1].b = {TimeFunction::constant(20.0)};
  PathState b0 = initial_state(big, {0.01, 1.0, 2.0, 0.0});
  CHECK_THROWS_AS(euler_step(b0, 0.01, {{-0.1}, {}}, big), SchemeViolationError);

  SimulationGrid g{0.01, 1.005, 2.0, 0.0};
  CHECK_THROWS_AS(g.validate(), GridError);
  SimulationGrid h{0.01, 3.0, 2.0, 0.0};
  CHECK_THROWS_AS(h.validate(), GridError);
}

TEST_CASE("a c = -1 jump absorbs the spot") {
  ModelSpec s = zero_spec(1, 1, 0.02);
  s.jumps = JumpMeasure::atomic({{1.0, 0.5}});
  s.spots[1].c = MarkFunction::constant(-1.0);
  PathState st = initial_state(s, {0.01, 1.0, 2.0, 0.0});
  st = euler_step(st, 0.01, {{0.0}, {}}, s);
  CHECK(st.spots[1] == doctest::Approx(1.0 + 0.005).epsilon(1e-14));
  st = euler_step(st, 0.01, {{0.0}, {{1.0, 1}}}, s);
  CHECK(st.spots[1] == 0.0);
  for (int k = 0; k < 10; ++k) st = euler_step(st, 0.01, {{0.3}, {}}, s);
  CHECK(st.spots[1] == 0.0);
}

TEST_CASE("zero-noise risk-neutral Vasicek drift matches the closed form") {
  const double c = 0.02, delta = -1.0, dt = 1e-3;
  ModelSpec s = vasicek(0, 1, c, delta, 0.03);
  s.measure = Measure::RiskNeutral;
  PathState st = initial_state(s, {dt, 1.0, 3.0, 0.0});
  for (int k = 0; k < 1000; ++k) st = euler_step(st, dt, {{0.0}, {}}, s);
  // eta_t(xi) = h(xi+t) + int_0^t alpha(xi+u) du, alpha(x) = c^2 e^{dx}(e^{dx}-1)/d
  auto A = [&](double x) { return c * c / delta * (std::exp(2 * delta * x) / (2 * delta) - std::exp(delta * x) / delta); };
  for (double xi : {0.0, 0.5, 1.5})
    CHECK(eval(st.family[0], xi) == doctest::Approx(0.03 + A(xi + 1.0) - A(xi)).epsilon(1e-6));
}

TEST_CASE("Brownian increments are consistent under noise refinement") {
  ModelSpec s = vasicek(0, 2, 0.01, -1.0, 0.0);
  SimulationConfig fine = small_cfg(1, 0.01, 1.0, 2.0), coarse = small_cfg(1, 0.02, 1.0, 2.0);
  fine.grid.noise_dt = 0.01;
  coarse.grid.noise_dt = 0.01;
  NoiseSource nf(fine, s, 3), nc(coarse, s, 3);
  std::vector<double> a, b, w;
  for (std::size_t k = 0; k < 50; ++k) {
    nc.brownian(k, w);
    nf.brownian(2 * k, a);
    nf.brownian(2 * k + 1, b);
    for (std::size_t f = 0; f < 2; ++f) CHECK(w[f] == doctest::Approx(a[f] + b[f]).epsilon(1e-14));
  }
}

TEST_CASE("jump counts have the Poisson mean") {
  ModelSpec s = jumpy(true);
  SimulationConfig cfg = small_cfg(1, 0.01, 1.0, 2.0);
  double total = 0.0;
  const std::size_t n = 4000;
  for (std::size_t p = 0; p < n; ++p) total += static_cast<double>(NoiseSource(cfg, s, p).jump_events().size());
  const double mean = total / n, se = std::sqrt(3.0 / n);
  CHECK(std::abs(mean - 3.0) < 4 * se);
}

TEST_CASE("fast path reproduces curve stepping") {
  for (bool atomic : {true, false}) {
    CAPTURE(atomic);
    ModelSpec s = jumpy(atomic);
    SimulationConfig cfg = small_cfg(12, 0.01, 0.6, 1.5);
    cfg.track_cone = false;
    const PathEnsemble fast = simulate(cfg, s);
    cfg.allow_fast_path = false;
    const PathEnsemble step = simulate(cfg, s);
    REQUIRE(fast.fast_path);
    REQUIRE_FALSE(step.fast_path);
    double worst = 0.0;
    for (std::size_t p = 0; p < cfg.n_paths; ++p)
      for (std::size_t r = 0; r < fast.records(); ++r) {
        worst = std::max({worst, rel(fast.numeraire(p, r), step.numeraire(p, r)), rel(fast.deflator(p, r), step.deflator(p, r))});
        for (std::size_t i = 0; i < 3; ++i) {
          worst = std::max({worst, rel(fast.spot(p, r, i), step.spot(p, r, i)), rel(fast.short_end(p, r, i), step.short_end(p, r, i))});
          for (std::size_t j = 0; j < 3; ++j) {
            const double a = fast.bond_price(p, r, i, j), b = step.bond_price(p, r, i, j);
            CHECK(std::isnan(a) == std::isnan(b));
            if (!std::isnan(a)) worst = std::max(worst, rel(a, b));
          }
        }
      }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("ensembles do not depend on the thread count") {
  ModelSpec s = jumpy(true);
  SimulationConfig cfg = small_cfg(9, 0.01, 0.5, 1.0);
  const PathEnsemble a = simulate(cfg, s);
  cfg.threads = 4;
  const PathEnsemble b = simulate(cfg, s);
  for (std::size_t p = 0; p < 9; ++p)
    for (std::size_t r = 0; r < a.records(); ++r) {
      CHECK(a.spot(p, r, 2) == b.spot(p, r, 2));
      CHECK(a.cone_gap(p, r) == b.cone_gap(p, r));
      CHECK(a.bond_price(p, r, 1, 1) == b.bond_price(p, r, 1, 1));
    }
}

TEST_CASE("record schedule and stored curves") {
  SimulationConfig cfg = small_cfg(3, 0.01, 0.33, 1.0);
  cfg.record_every = 10;
  CHECK(record_schedule(cfg) == std::vector<std::size_t>{0, 10, 20, 30, 33});
  cfg.store_curves_paths = 2;
  cfg.maturities = {0.2, 1.0};
  const PathEnsemble e = simulate(cfg, vasicek(1, 1, 0.01, -1.0, 0.02));
  CHECK_FALSE(e.fast_path);
  REQUIRE(e.family(1, 4) != nullptr);
  CHECK(e.family(2, 4) == nullptr);
  CHECK(e.family(1, 4)->horizon() == doctest::Approx(0.67));
  CHECK(std::isnan(e.bond_price(0, 3, 1, 0)));
  CHECK(e.bond_price(0, 2, 1, 0) == 1.0);
  CHECK(e.short_end(1, 4, 1) == (*e.family(1, 4))[1].h0());
  cfg.maturities = {1.5};
  CHECK_THROWS_AS(simulate(cfg, vasicek(1, 1, 0.01, -1.0, 0.02)), DomainError);
}

TEST_CASE("short-end moments under risk-neutral Vasicek") {
  const double c = 0.02, delta = -1.0, t = 1.0;
  ModelSpec s = vasicek(0, 1, c, delta, 0.03);
  s.measure = Measure::RiskNeutral;
  SimulationConfig cfg = small_cfg(4000, 0.01, t, 3.0);
  const PathEnsemble e = simulate(cfg, s);
  const std::size_t r = *e.record_at(t);
  double m = 0.0, q = 0.0;
  for (std::size_t p = 0; p < e.paths(); ++p) m += e.short_end(p, r, 0);
  m /= e.paths();
  for (std::size_t p = 0; p < e.paths(); ++p) q += std::pow(e.short_end(p, r, 0) - m, 2);
  q /= e.paths() - 1;
  const double mean = 0.03 + c * c / (2 * delta * delta) * std::pow(std::exp(delta * t) - 1, 2);
  const double var = c * c * (std::exp(2 * delta * t) - 1) / (2 * delta);
  CHECK(std::abs(m - mean) < 4 * std::sqrt(var / e.paths()));
  CHECK(q == doctest::Approx(var).epsilon(0.1));
}
