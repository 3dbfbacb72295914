#include "hjm/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjm/errors.hpp"

namespace hjm {
namespace {

constexpr double kNodeSnap = 1e-9;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw InvalidCurveError(std::string("non-finite ") + what);
}

// Snap xi onto a node if it is within kNodeSnap grid cells of one.
bool node_index(double xi, double step, std::size_t& j) {
  const double r = xi / step;
  const double n = std::nearbyint(r);
  if (std::abs(r - n) > kNodeSnap) return false;
  j = static_cast<std::size_t>(n);
  return true;
}

void require_same_grid(const Curve& a, const Curve& b) {
  if (!a.same_grid(b))
    throw GridError("curves live on different maturity grids");
}

}  // namespace

Curve::Curve(double h0, std::vector<double> derivative, double grid_step)
    : deriv_(std::move(derivative)), step_(grid_step) {
  if (!(step_ > 0.0) || !std::isfinite(step_)) throw InvalidCurveError("grid_step must be positive");
  if (deriv_.empty()) throw InvalidCurveError("curve needs at least one derivative sample");
  require_finite(h0, "h0");
  for (double d : deriv_) require_finite(d, "derivative sample");
  rebuild_values(h0);
}

Curve::Curve(Raw, std::vector<double> derivative, std::vector<double> values, double grid_step)
    : deriv_(std::move(derivative)), values_(std::move(values)), step_(grid_step) {}

void Curve::rebuild_values(double h0) {
  values_.resize(deriv_.size());
  values_[0] = h0;
  const double half = 0.5 * step_;
  for (std::size_t k = 1; k < deriv_.size(); ++k)
    values_[k] = values_[k - 1] + half * (deriv_[k - 1] + deriv_[k]);
}

Curve Curve::from_parts(std::vector<double> derivative, std::vector<double> values, double grid_step) {
  if (derivative.empty() || derivative.size() != values.size() || !(grid_step > 0.0))
    throw InvalidCurveError("derivative and value arrays must match");
  return Curve(Raw{}, std::move(derivative), std::move(values), grid_step);
}

Curve Curve::constant(double value, double grid_step, std::size_t intervals) {
  return Curve(value, std::vector<double>(intervals + 1, 0.0), grid_step);
}

Curve Curve::from_function(const std::function<double(double)>& f,
                           const std::function<double(double)>& fprime,
                           double grid_step, std::size_t intervals) {
  std::vector<double> d(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) d[k] = fprime(grid_step * static_cast<double>(k));
  return Curve(f(0.0), std::move(d), grid_step);
}

double Curve::operator()(double xi) const { return eval(*this, xi); }

Curve Curve::truncated(std::size_t n) const {
  if (n > intervals()) throw DomainError("truncation beyond curve horizon");
  return Curve(Raw{}, std::vector<double>(deriv_.begin(), deriv_.begin() + n + 1),
               std::vector<double>(values_.begin(), values_.begin() + n + 1), step_);
}

bool Curve::same_grid(const Curve& o) const {
  return intervals() == o.intervals() && std::abs(step_ - o.step_) <= 1e-12 * step_;
}

Curve& Curve::operator+=(const Curve& o) {
  require_same_grid(*this, o);
  for (std::size_t k = 0; k < deriv_.size(); ++k) {
    deriv_[k] += o.deriv_[k];
    values_[k] += o.values_[k];
  }
  return *this;
}

Curve& Curve::operator-=(const Curve& o) {
  require_same_grid(*this, o);
  for (std::size_t k = 0; k < deriv_.size(); ++k) {
    deriv_[k] -= o.deriv_[k];
    values_[k] -= o.values_[k];
  }
  return *this;
}

Curve& Curve::operator*=(double s) {
  for (std::size_t k = 0; k < deriv_.size(); ++k) {
    deriv_[k] *= s;
    values_[k] *= s;
  }
  return *this;
}

Curve& Curve::axpy(double s, const Curve& x) {
  require_same_grid(*this, x);
  for (std::size_t k = 0; k < deriv_.size(); ++k) {
    deriv_[k] += s * x.deriv_[k];
    values_[k] += s * x.values_[k];
  }
  return *this;
}

Curve operator+(Curve a, const Curve& b) { return a += b; }
Curve operator-(Curve a, const Curve& b) { return a -= b; }
Curve operator*(double s, Curve c) { return c *= s; }

double norm(const Curve& c, double rho) {
  if (!(rho > 0.0)) throw ParameterError("norm needs rho > 0");
  const auto d = c.derivative();
  const double step = c.grid_step();
  double acc = 0.0;
  const std::size_t n = c.intervals();
  for (std::size_t k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 * step : step;
    acc += w * d[k] * d[k] * std::exp(rho * step * static_cast<double>(k));
  }
  if (n == 0) acc = 0.0;
  const double h0 = c.h0();
  return std::sqrt(h0 * h0 + acc);
}

double eval(const Curve& c, double xi) {
  if (xi < 0.0 || std::isnan(xi)) throw DomainError("eval at negative maturity");
  const auto v = c.values();
  const auto d = c.derivative();
  const std::size_t n = c.intervals();
  const double step = c.grid_step();
  std::size_t j = 0;
  if (node_index(xi, step, j)) return j >= n ? v[n] : v[j];
  if (xi >= c.horizon()) return v[n];
  const auto k = static_cast<std::size_t>(std::floor(xi / step));
  if (k >= n) return v[n];
  const double s = xi - step * static_cast<double>(k);
  return v[k] + s * d[k] + s * s / (2.0 * step) * (d[k + 1] - d[k]);
}

Curve integral_op(const Curve& c) {
  const auto v = c.values();
  return Curve(0.0, std::vector<double>(v.begin(), v.end()), c.grid_step());
}

Curve product(const Curve& a, const Curve& b) {
  require_same_grid(a, b);
  const auto av = a.values(), bv = b.values(), ad = a.derivative(), bd = b.derivative();
  std::vector<double> d(ad.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = ad[k] * bv[k] + av[k] * bd[k];
  return Curve(av[0] * bv[0], std::move(d), a.grid_step());
}

Curve compose(const Curve& c, const std::function<double(double)>& f,
              const std::function<double(double)>& fprime) {
  const auto v = c.values(), cd = c.derivative();
  std::vector<double> d(cd.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = fprime(v[k]) * cd[k];
  return Curve(f(v[0]), std::move(d), c.grid_step());
}

Curve shift(const Curve& c, double t) {
  if (t < 0.0 || std::isnan(t)) throw DomainError("shift by negative time");
  const double step = c.grid_step();
  const std::size_t n = c.intervals();
  std::size_t j = 0;
  if (node_index(t, step, j)) {
    if (j == 0) return c;
    if (j >= n) return Curve::constant(c.values()[n], step, 0);
    return Curve(Curve::Raw{}, std::vector<double>(c.deriv_.begin() + j, c.deriv_.end()),
                 std::vector<double>(c.values_.begin() + j, c.values_.end()), step);
  }
  const auto k = static_cast<std::size_t>(std::floor(t / step));
  if (k + 1 >= n) return Curve::constant(eval(c, t), step, 0);
  const double s = (t - step * static_cast<double>(k)) / step;
  const std::size_t m = n - k - 1;
  std::vector<double> d(m + 1);
  for (std::size_t l = 0; l <= m; ++l)
    d[l] = (1.0 - s) * c.deriv_[k + l] + s * c.deriv_[k + l + 1];
  return Curve(eval(c, t), std::move(d), step);
}

double integrate(const Curve& c, double tau) {
  if (tau < 0.0 || std::isnan(tau)) throw DomainError("negative integration length");
  const double step = c.grid_step();
  const std::size_t n = c.intervals();
  if (tau > c.horizon() * (1.0 + 1e-12) + 1e-300) throw DomainError("integration beyond curve horizon");
  const auto v = c.values();
  const double half = 0.5 * step;
  std::size_t j = 0;
  const bool aligned = node_index(tau, step, j);
  const std::size_t full = aligned ? std::min(j, n) : static_cast<std::size_t>(std::floor(tau / step));
  double acc = 0.0;
  for (std::size_t k = 1; k <= full; ++k) acc = acc + half * (v[k - 1] + v[k]);
  if (aligned || full >= n) return acc;
  const double s = tau - step * static_cast<double>(full);
  return acc + s * v[full] + s * s / (2.0 * step) * (v[full + 1] - v[full]);
}

SpaceConstants constants(const SpaceParams& p) {
  if (!(p.rho > 0.0) || !(p.rho_prime > p.rho) || !std::isfinite(p.rho_prime))
    throw ParameterError("space parameters need 0 < rho < rho_prime");
  const double c_rho = 1.0 + 1.0 / std::sqrt(p.rho);
  const double c_rr = std::sqrt(1.0 / (p.rho_prime * (p.rho_prime - p.rho)));
  return {c_rho, c_rr, c_rho * c_rr};
}

double v_k(double k, double r) { return r * (1.0 + r) * std::exp(k * r); }

// Bisection run until the bracket cannot shrink further, which is tighter
// than the 1e-12 absolute target.
double w_k_inverse(double k, double r) {
  if (!(k > 0.0)) throw ParameterError("V_K needs K > 0");
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("W_K needs r >= 0");
  if (r == 0.0) return 0.0;
  double lo = 0.0, hi = std::max(1.0, r);
  while (v_k(k, hi) < r) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error("W_K bracket failure");
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (v_k(k, mid) < r) lo = mid; else hi = mid;
  }
  return std::abs(v_k(k, lo) - r) <= std::abs(v_k(k, hi) - r) ? lo : hi;
}

VWValues v_w_functions(double k, double r) {
  const double w = w_k_inverse(k, r);
  return {v_k(k, r), w, std::min(w, r)};
}

CurveFamily::CurveFamily(std::vector<Curve> curves) : curves_(std::move(curves)) {
  if (curves_.empty()) throw InvalidCurveError("curve family needs at least the riskless curve");
  for (const auto& c : curves_)
    if (!c.same_grid(curves_.front())) throw GridError("family members must share one grid");
}

}  // namespace hjm
