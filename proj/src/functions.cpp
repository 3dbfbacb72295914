#include "hjm/functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "hjm/errors.hpp"

namespace hjm {

TimeFunction TimeFunction::constant(double value) {
  if (!std::isfinite(value)) throw ParameterError("time function constant must be finite");
  TimeFunction f;
  f.kind_ = Kind::Constant;
  f.p0_ = value;
  return f;
}

TimeFunction TimeFunction::exponential(double scale, double rate) {
  if (!std::isfinite(scale) || !std::isfinite(rate)) throw ParameterError("exponential parameters must be finite");
  TimeFunction f;
  f.kind_ = Kind::Exponential;
  f.p0_ = scale;
  f.p1_ = rate;
  return f;
}

TimeFunction TimeFunction::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1) throw ParameterError("piecewise table needs one more value than breaks");
  if (!std::is_sorted(breaks.begin(), breaks.end())) throw ParameterError("piecewise breaks must be sorted");
  TimeFunction f;
  f.kind_ = Kind::Piecewise;
  f.breaks_ = std::move(breaks);
  f.values_ = std::move(values);
  return f;
}

TimeFunction TimeFunction::callable(std::function<double(double)> fn) {
  TimeFunction f;
  f.kind_ = Kind::Callable;
  f.f_ = std::move(fn);
  return f;
}

double TimeFunction::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant: return p0_;
    case Kind::Exponential: return p0_ * std::exp(p1_ * t);
    case Kind::Piecewise: {
      const auto k = std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin();
      return values_[static_cast<std::size_t>(k)];
    }
    case Kind::Callable: return f_(t);
  }
  return 0.0;
}

double TimeFunction::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  switch (kind_) {
    case Kind::Constant: return p0_ * (b - a);
    case Kind::Exponential:
      if (p1_ == 0.0) return p0_ * (b - a);
      return p0_ * std::exp(p1_ * a) * std::expm1(p1_ * (b - a)) / p1_;
    case Kind::Piecewise: {
      double acc = 0.0, lo = a;
      for (double br : breaks_) {
        if (br <= lo) continue;
        if (br >= b) break;
        acc += (*this)(lo) * (br - lo);
        lo = br;
      }
      return acc + (*this)(lo) * (b - lo);
    }
    case Kind::Callable: {
      const auto nodes = gauss_legendre(32, a, b);
      double acc = 0.0;
      for (const auto& q : nodes) acc += q.weight * f_(q.x);
      return acc;
    }
  }
  return 0.0;
}

double TimeFunction::derivative(double t) const {
  switch (kind_) {
    case Kind::Constant: return 0.0;
    case Kind::Exponential: return p0_ * p1_ * std::exp(p1_ * t);
    case Kind::Piecewise: return 0.0;
    case Kind::Callable: {
      const double h = 1e-5 * std::max(1.0, std::abs(t));
      return (f_(t + h) - f_(t - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

MarkFunction MarkFunction::constant(double value) {
  if (!std::isfinite(value)) throw ParameterError("mark function constant must be finite");
  MarkFunction f;
  f.p0_ = value;
  return f;
}

MarkFunction MarkFunction::affine(double intercept, double slope) {
  MarkFunction f;
  f.kind_ = Kind::Affine;
  f.p0_ = intercept;
  f.p1_ = slope;
  return f;
}

MarkFunction MarkFunction::table(std::vector<double> xs, std::vector<double> values) {
  if (xs.empty() || xs.size() != values.size()) throw ParameterError("mark table needs matching non-empty knots");
  if (!std::is_sorted(xs.begin(), xs.end())) throw ParameterError("mark table knots must be sorted");
  MarkFunction f;
  f.kind_ = Kind::Table;
  f.xs_ = std::move(xs);
  f.values_ = std::move(values);
  return f;
}

MarkFunction MarkFunction::callable(std::function<double(double, double)> fn) {
  MarkFunction f;
  f.kind_ = Kind::Callable;
  f.f_ = std::move(fn);
  return f;
}

double MarkFunction::operator()(double t, double x) const {
  switch (kind_) {
    case Kind::Constant: return p0_;
    case Kind::Affine: return p0_ + p1_ * x;
    case Kind::Table: {
      if (x <= xs_.front()) return values_.front();
      if (x >= xs_.back()) return values_.back();
      const auto k = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
      const double w = (x - xs_[k - 1]) / (xs_[k] - xs_[k - 1]);
      return (1.0 - w) * values_[k - 1] + w * values_[k];
    }
    case Kind::Callable: return f_(t, x);
  }
  return 0.0;
}

namespace {

// Legendre P_n(x) and P_{n-1}(x) by the three-term recurrence
std::pair<double, double> legendre(std::size_t n, double x) {
  double p0 = 1.0, p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

}  // namespace

std::vector<QuadratureNode> gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw ParameterError("Gauss-Legendre needs at least one node");
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  if (n == 1) return {{mid, b - a}};
  std::vector<QuadratureNode> out(n);
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pm] = legendre(n, x);
      dp = nn * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, pm] = legendre(n, x);
    dp = nn * (x * pn - pm) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[i] = {mid - half * x, half * w};
    out[n - 1 - i] = {mid + half * x, half * w};
  }
  return out;
}

JumpMeasure JumpMeasure::none() { return JumpMeasure{}; }

JumpMeasure JumpMeasure::atomic(std::vector<QuadratureNode> atoms) {
  JumpMeasure j;
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight) || !std::isfinite(a.x))
      throw ParameterError("jump measure atoms need finite marks and nonnegative weights (intensity >= 0)");
    total += a.weight;
    j.cumulative_.push_back(total);
  }
  j.kind_ = atoms.empty() ? Kind::None : Kind::Atomic;
  j.intensity_ = total;
  j.nodes_ = std::move(atoms);
  return j;
}

JumpMeasure JumpMeasure::truncated_exponential(double intensity, double rate, double x_max,
                                               std::size_t nodes) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw ParameterError("jump measure intensity must be finite and >= 0");
  if (!(rate > 0.0) || !(x_max > 0.0)) throw ParameterError("truncated exponential needs rate > 0 and x_max > 0");
  JumpMeasure j;
  j.kind_ = intensity == 0.0 ? Kind::None : Kind::TruncatedExponential;
  j.intensity_ = intensity;
  j.rate_ = rate;
  j.x_max_ = x_max;
  if (intensity == 0.0) return j;
  const double norm = -std::expm1(-rate * x_max);
  for (auto q : gauss_legendre(nodes, 0.0, x_max)) {
    q.weight *= intensity * rate * std::exp(-rate * q.x) / norm;
    j.nodes_.push_back(q);
  }
  return j;
}

double JumpMeasure::integrate(const std::function<double(double)>& g) const {
  double acc = 0.0;
  for (const auto& q : nodes_) acc += q.weight * g(q.x);
  return acc;
}

double JumpMeasure::sample_mark(double u) const {
  switch (kind_) {
    case Kind::None: throw DomainError("no marks to sample from an empty jump measure");
    case Kind::Atomic: {
      const double target = u * intensity_;
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
      if (it == cumulative_.end()) --it;
      return nodes_[static_cast<std::size_t>(it - cumulative_.begin())].x;
    }
    case Kind::TruncatedExponential:
      return -std::log1p(u * std::expm1(-rate_ * x_max_)) / rate_;
  }
  return 0.0;
}

}  // namespace hjm
