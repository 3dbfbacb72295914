#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "hjm/curve.hpp"
#include "hjm/errors.hpp"
#include "test_support.hpp"

using namespace hjm;
using doctest::Approx;

namespace {

Curve exp_decay(double step, std::size_t n) {
  return Curve::from_function([](double x) { return std::exp(-x); }, [](double x) { return -std::exp(-x); }, step, n);
}

Curve ramp(double step, std::size_t n) {
  return Curve(0.0, std::vector<double>(n + 1, 1.0), step);
}

double oracle_norm(const std::function<double(double)>& h0, const std::function<double(double)>& hp,
                   double rho, double upper) {
  using boost::math::quadrature::gauss_kronrod;
  const double integral = gauss_kronrod<double, 61>::integrate(
      [&](double s) { return hp(s) * hp(s) * std::exp(rho * s); }, 0.0, upper, 15, 1e-14);
  return std::sqrt(h0(0.0) * h0(0.0) + integral);
}

}  // namespace

TEST_CASE("norm examples") {
  CHECK(norm(Curve::constant(3.0, 0.1, 50), 1.0) == 3.0);
  CHECK(norm(Curve::constant(0.0, 0.1, 50), 1.0) == 0.0);
  CHECK(norm(exp_decay(1e-4, 400000), 1.0) == Approx(std::sqrt(2.0)).epsilon(1e-8));
  CHECK_THROWS_AS(Curve(std::nan(""), {0.0}, 0.1), InvalidCurveError);
  CHECK_THROWS_AS(Curve(0.0, {0.0, INFINITY}, 0.1), InvalidCurveError);
  CHECK_THROWS_AS(norm(Curve::constant(1.0, 0.1, 2), 0.0), ParameterError);
}

TEST_CASE("norm agrees with adaptive quadrature oracle") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto dc = test::random_damped(rng::key(7, s), 1.5);
    const double step = 1e-4, H = 20.0;
    const Curve c = dc.build(step, static_cast<std::size_t>(H / step));
    for (double rho : {0.5, 1.0, 2.0}) {
      const double want = oracle_norm([&](double x) { return dc.f(x); }, [&](double x) { return dc.fp(x); }, rho, H);
      CHECK(norm(c, rho) == Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("eval examples") {
  CHECK(eval(Curve::constant(3.0, 0.1, 10), 7.0) == 3.0);
  CHECK(eval(ramp(0.1, 10), 0.5) == Approx(0.5).epsilon(1e-14));
  CHECK(eval(ramp(0.1, 10), 0.55) == Approx(0.55).epsilon(1e-14));
  CHECK(eval(exp_decay(1e-3, 5000), 1.0) == Approx(std::exp(-1.0)).epsilon(1e-7));
  CHECK(eval(ramp(0.1, 10), 5.0) == Approx(1.0));  // flat past the horizon
  CHECK_THROWS_AS(eval(ramp(0.1, 10), -0.1), DomainError);
}

TEST_CASE("integral operator examples") {
  const Curve z = integral_op(Curve::constant(0.0, 0.1, 10));
  for (double v : z.values()) CHECK(v == 0.0);
  const Curve r = integral_op(Curve::constant(1.0, 0.1, 10));
  for (std::size_t k = 0; k <= 10; ++k) CHECK(r.values()[k] == Approx(0.1 * k).epsilon(1e-14));
  const Curve e = integral_op(exp_decay(1e-3, 5000));
  for (double x : {0.0, 0.5, 1.0, 3.7, 5.0}) CHECK(eval(e, x) == Approx(1.0 - std::exp(-x)).epsilon(1e-6));
  CHECK(eval(e, 0.0) == 0.0);
}

TEST_CASE("integrate matches eval of integral_op") {
  const auto dc = test::random_damped(99, 0.5);
  const Curve c = dc.build(0.01, 500);
  for (double tau : {0.0, 0.01, 0.5, 1.234, 3.0, 4.999, 5.0}) {
    CHECK(integrate(c, tau) == Approx(eval(integral_op(c), tau)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(integrate(c, 5.5), DomainError);
}

TEST_CASE("product examples") {
  const Curve p = product(Curve::constant(2.0, 0.1, 10), Curve::constant(5.0, 0.1, 10));
  for (double v : p.values()) CHECK(v == 10.0);
  const Curve q = product(ramp(0.1, 10), Curve::constant(1.0, 0.1, 10));
  for (std::size_t k = 0; k <= 10; ++k) CHECK(q.values()[k] == Approx(0.1 * k).epsilon(1e-14));
  const Curve e = product(exp_decay(1e-3, 3000), exp_decay(1e-3, 3000));
  for (double x : {0.0, 1.0, 2.5}) CHECK(eval(e, x) == Approx(std::exp(-2.0 * x)).epsilon(1e-6));
  CHECK_THROWS_AS(product(ramp(0.1, 10), ramp(0.1, 11)), GridError);
  CHECK_THROWS_AS(product(ramp(0.1, 10), ramp(0.2, 10)), GridError);
}

TEST_CASE("shift examples and semigroup law") {
  const Curve c3 = shift(Curve::constant(3.0, 0.1, 10), 0.37);
  for (double v : c3.values()) CHECK(v == Approx(3.0));
  const Curve r = ramp(0.1, 30);
  const Curve r0 = shift(r, 0.0);
  CHECK(std::equal(r0.values().begin(), r0.values().end(), r.values().begin()));
  const Curve r1 = shift(r, 1.0);
  CHECK(r1.intervals() == 20);
  for (double x : {0.0, 0.5, 1.9}) CHECK(eval(r1, x) == Approx(1.0 + x).epsilon(1e-14));
  CHECK_THROWS_AS(shift(r, -0.1), DomainError);

  const auto dc = test::random_damped(3, 0.2);
  const Curve c = dc.build(0.01, 800);
  for (int s = 0; s < 5; ++s)
    for (int t = 0; t < 5; ++t) {
      const Curve a = shift(shift(c, 0.01 * 37 * s), 0.01 * 11 * t);
      const Curve b = shift(c, 0.01 * (37 * s + 11 * t));
      REQUIRE(a.intervals() == b.intervals());
      for (std::size_t k = 0; k <= a.intervals(); ++k) {
        CHECK(a.values()[k] == b.values()[k]);
        CHECK(a.derivative()[k] == b.derivative()[k]);
      }
    }
  // off-grid shift interpolates the derivative
  const Curve off = shift(c, 0.125);
  for (double x : {0.0, 1.0, 3.3}) CHECK(eval(off, x) == Approx(dc.f(0.125 + x)).epsilon(1e-4));
}

TEST_CASE("space constants") {
  const auto k = constants({1.0, 2.0});
  CHECK(k.c_rho == Approx(2.0));
  CHECK(k.c_rho_rhop == Approx(1.0 / std::sqrt(2.0)));
  CHECK(k.k_rho_rhop == Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(constants({1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(constants({0.0, 1.0}), ParameterError);
}

TEST_CASE("V_K and W_K") {
  const auto a = v_w_functions(1.0, 1.0);
  CHECK(a.v == Approx(2.0 * std::exp(1.0)));
  const auto b = v_w_functions(1.0, 2.0 * std::exp(1.0));
  CHECK(std::abs(b.w_inv - 1.0) < 1e-10);
  CHECK(b.w_small == b.w_inv);
  const auto z = v_w_functions(3.0, 0.0);
  CHECK(z.v == 0.0);
  CHECK(z.w_inv == 0.0);
  CHECK(z.w_small == 0.0);
  for (double K : {0.1, 1.0, 5.0})
    for (int j = 0; j <= 200; ++j) {
      const double r = 1000.0 * j / 200.0;
      CHECK(std::abs(v_k(K, w_k_inverse(K, r)) - r) <= 1e-10);
    }
  CHECK_THROWS_AS(v_w_functions(1.0, -1.0), DomainError);
}

TEST_CASE("sup-norm and integral operator bounds on random curves") {
  for (double rho : {0.5, 1.0, 2.0}) {
    const double rhop = rho + 1.0;
    const auto k = constants({rho, rhop});
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto dc = test::random_damped(rng::key(11, s, static_cast<std::uint64_t>(rho * 10)), 0.5 * rhop + 0.25);
      const Curve c = test::vanishing_at_horizon(dc, 0.01, 1500);
      double sup = 0.0;
      for (double v : c.values()) sup = std::max(sup, std::abs(v));
      CHECK(sup <= k.c_rho * norm(c, rho) + 1e-8);
      CHECK(norm(integral_op(c), rho) <= k.c_rho_rhop * norm(c, rhop) + 1e-8);
    }
  }
}
