#include <doctest.h>

#include <cmath>

#include "hjm/deflator.hpp"
#include "hjm/errors.hpp"
#include "hjm/invariance.hpp"
#include "hjm/mmm.hpp"

using namespace hjm;

namespace {

MmmParams three_index() {
  MmmParams p;
  p.r = TimeFunction::constant(0.02);
  p.a = {TimeFunction::constant(0.0), TimeFunction::constant(0.01), TimeFunction::exponential(0.02, 0.05)};
  p.spots0 = {1.0, 0.8, 1.0};
  return p;
}

}  // namespace

TEST_CASE("phi_time") {
  const MmmParams p;
  CHECK(phi_time(p, 0.0) == 0.0);
  CHECK(phi_time(p, 1.0) == doctest::Approx(0.1 * (std::exp(0.1) - 1.0)).epsilon(1e-15));
  CHECK(phi_time(p, 1.0) == doctest::Approx(0.0105171).epsilon(1e-6));
  CHECK(phi_time(p, 2.0) > phi_time(p, 1.0));
  CHECK_THROWS_AS(phi_time(p, -0.1), DomainError);
  MmmParams bad;
  bad.eta = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("market price of risk contribution") {
  const MmmParams p;
  const double T = 10.0 * std::log(6.0);  // phi(T) = 0.5
  CHECK(mprc(p, 0.0, T, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(mprc(p, 0.0, T, 1.0) == doctest::Approx(0.632121).epsilon(1e-6));
  CHECK(mprc(p, 1.0, 1.0 + 1e-9, 1.0) == 1.0);
  CHECK(mprc(p, 0.0, 500.0, 1.0) < 1e-20);
  CHECK(mprc_complement(p, 0.0, 1.0, 1.0) == doctest::Approx(std::exp(-1.0 / (2.0 * phi_time(p, 1.0)))).epsilon(1e-14));
  CHECK(mprc_complement(p, 0.0, 1.0, 1.0) > 0.0);
  CHECK_THROWS_AS(mprc(p, 1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(mprc(p, 0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("analytic m(t,T) against central differences") {
  const MmmParams p;
  const double h = 1e-4;
  for (double t : {0.0, 0.7})
    for (double xbar : {0.5, 1.3})
      for (double tau : {2.0, 8.0, 25.0, 60.0}) {
        const double T = t + tau;
        const double fd = -(std::log(mprc(p, t, T + h, xbar)) - std::log(mprc(p, t, T - h, xbar))) / (2 * h);
        CHECK(mprc_forward(p, t, T, xbar) == doctest::Approx(fd).epsilon(1e-6));
        const double fs = (mprc_forward(p, t, T + h, xbar) - mprc_forward(p, t, T - h, xbar)) / (2 * h);
        CHECK(mprc_forward_slope(p, t, T, xbar) == doctest::Approx(fs).epsilon(1e-6));
      }
  CHECK(mprc_forward(p, 1.0, 1.0, 1.0) == 0.0);
}

TEST_CASE("gop_step") {
  const MmmParams p;
  CHECK(gop_step(1.3, p, 2.0, 0.01, 0.0) == doctest::Approx(1.3 + 0.04 * std::exp(0.2) * 0.01).epsilon(1e-15));
  CHECK(gop_step(0.0, p, 2.0, 0.01, 0.7) == doctest::Approx(0.04 * std::exp(0.2) * 0.01).epsilon(1e-15));
  CHECK(gop_step(-0.01, p, 0.0, 0.01, 5.0) == doctest::Approx(-0.01 + 0.0004).epsilon(1e-15));
}

TEST_CASE("discounted GOP mean") {
  const MmmParams p;
  const GopPaths g = simulate_gop(p, 1e-2, 1.0, 100000, 3, 1, 100);
  double s = 0.0, q = 0.0;
  for (std::size_t k = 0; k < g.paths; ++k) s += g.at(k, 1);
  const double m = s / g.paths;
  for (std::size_t k = 0; k < g.paths; ++k) q += std::pow(g.at(k, 1) - m, 2);
  const double se = std::sqrt(q / (g.paths - 1) / g.paths);
  CHECK(std::abs(m - (1.0 + 0.4 * (std::exp(0.1) - 1.0))) < 3 * se);
  CHECK(g.truncated_steps == 0);
}

TEST_CASE("bond prices and forward curves") {
  const MmmParams p;
  const double T = 10.0 * std::log(6.0);
  CHECK(bond0_mmm(p, 0.0, T, 1.0) == doctest::Approx(0.632121).epsilon(1e-6));
  const MmmParams q = three_index();
  CHECK(bond0_mmm(q, 0.3, 0.3 + 1e-9, 1.1) == doctest::Approx(1.0).epsilon(1e-10));
  // at short maturities M rounds to one in double precision; strictness is carried by 1 - M
  CHECK(mprc_complement(q, 0.0, 1.0, 1.0) > 0.0);
  for (double tau : {10.0, 40.0}) CHECK(bond0_mmm(q, 0.0, tau, 1.0) < std::exp(-0.02 * tau));

  const double step = 0.01;
  const std::size_t n = 3000;
  const Curve f0 = forward_curve_mmm(q, 0, 0.5, 1.2, step, n);
  const Curve f1 = forward_curve_mmm(q, 1, 0.5, 1.2, step, n);
  const Curve f2 = forward_curve_mmm(q, 2, 0.5, 1.2, step, n);
  CHECK(f0.h0() == doctest::Approx(0.02));
  CHECK(cone_membership(CurveFamily({f0, f1, f2})).member);
  MmmParams flat = q;
  flat.a[1] = TimeFunction::constant(0.0);
  const Curve g1 = forward_curve_mmm(flat, 1, 0.5, 1.2, step, n);
  for (std::size_t k = 0; k <= n; k += 100) CHECK(g1.values()[k] == f0.values()[k]);
  for (double tau : {1.0, 5.0, 20.0, 30.0})
    CHECK(std::exp(-integrate(f0, tau)) == doctest::Approx(bond0_mmm(q, 0.5, 0.5 + tau, 1.2)).epsilon(1e-6));
}

TEST_CASE("strict local martingale gap") {
  const MmmParams p;
  const RatioEstimate e = expected_ratio(p, 0.0, 1.0, 20000, 1e-3, 11);
  CHECK(e.within_3se);
  CHECK(e.closed_form_below_one);
  CHECK(e.oracle_complement == doctest::Approx(std::exp(-1.0 / (2.0 * phi_time(p, 1.0)))));
  const RatioEstimate far = expected_ratio(p, 0.0, 10.0, 20000, 1e-2, 11);
  CHECK(far.within_3se);
  CHECK(far.mc_below_one);
  CHECK(far.truncation_rate < 1e-3);
}

TEST_CASE("one over the discounted GOP deflates MMM prices") {
  const MmmParams q = three_index();
  const GopPaths g = simulate_gop(q, 1e-2, 2.0, 20000, 5, 2, 50);
  const PathEnsemble e = mmm_ensemble(q, g, {1.0, 2.0, 10.0});
  const DeflatedSeries s = deflated_series(e, {1.0, 2.0, 10.0}, {0, 1, 2});
  for (double t : {1.0, 2.0})
    for (const auto& z : martingale_zscore(s, t)) {
      CAPTURE(z.index);
      CAPTURE(z.maturity);
      CAPTURE(t);
      CHECK(z.pass);
    }
  const MonotonicityReport r = monotonicity_report(e, mmm_model_spec(q));
  for (const auto& c : r.preconditions) CHECK(c.pass);
  CHECK(r.price_violations == 0);
  CHECK(r.comparisons > 0);
}
