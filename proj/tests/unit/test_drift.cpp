#include <doctest.h>

#include <cmath>

#include "hjm/drift.hpp"
#include "hjm/errors.hpp"

using namespace hjm;

namespace {

ModelSpec one_curve(double c, double delta, double lambda) {
  ModelSpec s = zero_spec(0, 1, 0.03);
  s.beta = Volatility::vasicek_exp({{c}}, {delta});
  s.market.lambda = {TimeFunction::constant(lambda)};
  return s;
}

ModelSpec jump_spec() {
  ModelSpec s = zero_spec(1, 2, 0.03);
  s.beta = Volatility::vasicek_exp({{0.01, 0.004}, {0.012, -0.003}}, {-1.0, -0.7});
  s.market.lambda = {TimeFunction::constant(0.2), TimeFunction::constant(-0.1)};
  s.market.psi = MarkFunction::affine(-0.1, 0.05);
  s.jumps = JumpMeasure::atomic({{0.5, 1.0}, {-0.4, 0.5}});
  s.gamma = JumpVolatility::exponential({0.004, 0.006}, {-1.0, -0.8});
  s.spots[1].b = {TimeFunction::constant(0.1), TimeFunction::constant(0.05)};
  s.spots[1].c = MarkFunction::affine(0.05, 0.2);
  return s;
}

}  // namespace

TEST_CASE("Vasicek drift closed form") {
  const double c = 0.015, d = -1.2, step = 1e-3;
  const std::size_t n = 4000;
  for (double lambda : {0.0, 0.4}) {
    const ModelSpec s = one_curve(c, d, lambda);
    const CurveFamily h = s.initial_family(step, n);
    const CurveFamily a = rw_drift(drift_inputs(h, 0.2, s));
    for (double xi : {0.0, 0.3, 1.0, 3.7}) {
      const double e = std::exp(d * xi);
      CHECK(eval(a[0], xi) == doctest::Approx(c * c / d * (e * e - e) - lambda * c * e).epsilon(1e-7));
    }
  }
}

TEST_CASE("zero volatilities give zero drift") {
  const ModelSpec s = zero_spec(2, 3, 0.01);
  const CurveFamily a = rw_drift(drift_inputs(s.initial_family(0.01, 100), 0.0, s));
  for (std::size_t i = 0; i < 3; ++i)
    for (double v : a[i].values()) CHECK(v == 0.0);
}

TEST_CASE("risk-neutral reduction") {
  ModelSpec s = jump_spec();
  const CurveFamily h = s.initial_family(0.01, 600);
  ModelSpec zero = s;
  zero.market.lambda = {TimeFunction::constant(0.0), TimeFunction::constant(0.0)};
  zero.market.psi = MarkFunction::constant(0.0);
  ModelSpec rn = s;
  rn.measure = Measure::RiskNeutral;
  const CurveFamily a = rw_drift(drift_inputs(h, 0.3, zero)), b = rw_drift(drift_inputs(h, 0.3, rn));
  for (std::size_t i = 0; i < 2; ++i) {
    const auto u = a[i].values(), v = b[i].values();
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(u[k] == v[k]);
  }
}

TEST_CASE("short-end drift examples") {
  ModelSpec s = zero_spec(1, 1, 0.02);
  s.spot_drift = SpotDrift::Specified;
  s.initial_curves = {InitialCurve::flat(0.02), InitialCurve::flat(0.03)};
  s.market.lambda = {TimeFunction::constant(0.01)};
  s.spots[1].b = {TimeFunction::constant(0.1)};
  const auto a = short_end_drift(drift_inputs(s.initial_family(0.01, 100), 0.0, s));
  CHECK(a[1] == doctest::Approx(-0.011).epsilon(1e-14));
  CHECK(a[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-16));

  const ModelSpec z = zero_spec(1, 1, 0.0);
  for (double v : short_end_drift(drift_inputs(z.initial_family(0.01, 100), 0.0, z))) CHECK(v == 0.0);

  // jump part: - sum w c psi
  ModelSpec j = s;
  j.jumps = JumpMeasure::atomic({{1.0, 2.0}});
  j.spots[1].c = MarkFunction::constant(0.3);
  j.market.psi = MarkFunction::constant(-0.5);
  const auto aj = short_end_drift(drift_inputs(j.initial_family(0.01, 100), 0.0, j));
  CHECK(aj[1] == doctest::Approx(-0.011 + 2.0 * 0.3 * 0.5).epsilon(1e-14));
}

TEST_CASE("integrated drift residual") {
  const double step = 1e-3;
  const ModelSpec v = one_curve(0.02, -1.0, 0.3);
  const CurveFamily hv = v.initial_family(step, 5000);
  for (double r : integrated_drift_residual(drift_inputs(hv, 0.0, v), 2.0)) CHECK(std::abs(r) < 1e-6);

  const ModelSpec j = jump_spec();
  const CurveFamily hj = j.initial_family(step, 5000);
  for (double r : integrated_drift_residual(drift_inputs(hj, 0.5, j), 2.5)) CHECK(std::abs(r) < 1e-6);

  const ModelSpec z = zero_spec(1, 1, 0.02);
  for (double r : integrated_drift_residual(drift_inputs(z.initial_family(step, 3000), 0.0, z), 2.0)) CHECK(r == 0.0);

  ModelSpec bumped = v;
  bumped.drift_bump = 0.01;
  const auto rb = integrated_drift_residual(drift_inputs(hv, 0.0, bumped), 2.0);
  CHECK(rb[0] == doctest::Approx(0.02).epsilon(1e-6));
  CHECK_THROWS_AS(integrated_drift_residual(drift_inputs(hv, 1.0, v), 0.5), DomainError);
}

TEST_CASE("jump integrability examples") {
  const ModelSpec none = zero_spec(1, 1, 0.02);
  const auto r0 = jump_integrability_check(drift_inputs(none.initial_family(0.01, 100), 0.0, none), 1.0);
  CHECK(r0[1].pass);
  CHECK(r0[1].value == 0.0);
  CHECK(r0[1].active == 0);

  ModelSpec s = zero_spec(1, 1, 0.02);
  s.jumps = JumpMeasure::atomic({{1.0, 1.0}});
  s.spots[1].c = MarkFunction::constant(0.5);
  const CurveFamily h = s.initial_family(0.01, 100);
  auto r = jump_integrability_check(drift_inputs(h, 0.0, s), 1.0);
  CHECK(r[1].active == 0);
  CHECK(r[1].value == 0.0);
  s.spots[1].c = MarkFunction::constant(3.0);
  r = jump_integrability_check(drift_inputs(h, 0.0, s), 1.0);
  CHECK(r[1].active == 1);
  CHECK(r[1].value == doctest::Approx(3.0));
  CHECK(r[1].pass);
}

TEST_CASE("drift vanishes at the far end for decaying volatilities") {
  const double c = 0.02, d = -1.5;
  const ModelSpec s = one_curve(c, d, 0.2);
  const CurveFamily a = rw_drift(drift_inputs(s.initial_family(0.01, 1200), 0.0, s));
  const double xi = 12.0, e = std::exp(d * xi);
  // stored values carry the cumulative trapezoid error step^2/12 |alpha''(0)|
  const double a2 = c * c / d * 3.0 * d * d - 0.2 * c * d * d;
  const double quad = 1e-4 / 12.0 * std::abs(a2) * 1.2;
  CHECK(std::abs(eval(a[0], xi)) <= c * c * e / std::abs(d) + 0.2 * c * e + quad);
}

TEST_CASE("consistent riskless short end tracks r over a step") {
  const ModelSpec s = one_curve(0.02, -1.0, 0.3);
  const CurveFamily h = s.initial_family(1e-3, 2000);
  const CurveFamily a = rw_drift(drift_inputs(h, 0.0, s));
  // eta_dt(0) = eta_0(dt) + dt alpha(dt) without noise; r = 0.03 flat
  const double moved = h[0].values()[1] + 1e-3 * a[0].values()[1];
  CHECK(std::abs(moved - 0.03) < 1e-3 * 0.02);
}

TEST_CASE("non-finite drift raises") {
  ModelSpec s = zero_spec(0, 1, 0.02);
  s.beta = Volatility::state_dependent([](const CurveFamily& h, std::size_t, std::size_t) {
    return Curve::constant(std::numeric_limits<double>::infinity(), h.grid_step(), h.intervals());
  });
  CHECK_THROWS(rw_drift(drift_inputs(s.initial_family(0.01, 10), 0.0, s)));
}
