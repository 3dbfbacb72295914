#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hjm {

// Deterministic function of time. Parametric families carry closed-form
// integrals and derivatives; callables fall back to quadrature / differences.
class TimeFunction {
 public:
  enum class Kind { Constant, Exponential, Piecewise, Callable };

  TimeFunction() = default;
  static TimeFunction constant(double value);
  static TimeFunction exponential(double scale, double rate);  // scale * exp(rate t)
  // right-continuous step function: values[k] on [breaks[k-1], breaks[k])
  static TimeFunction piecewise(std::vector<double> breaks, std::vector<double> values);
  static TimeFunction callable(std::function<double(double)> f);

  double operator()(double t) const;
  double integral(double a, double b) const;
  double derivative(double t) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  Kind kind() const { return kind_; }

 private:
  Kind kind_ = Kind::Constant;
  double p0_ = 0.0, p1_ = 0.0;
  std::vector<double> breaks_, values_;
  std::function<double(double)> f_;
};

// Function of (t, mark x).
class MarkFunction {
 public:
  enum class Kind { Constant, Affine, Table, Callable };

  MarkFunction() = default;
  static MarkFunction constant(double value);
  static MarkFunction affine(double intercept, double slope);  // intercept + slope*x
  // linear interpolation in x over knots, flat outside
  static MarkFunction table(std::vector<double> xs, std::vector<double> values);
  static MarkFunction callable(std::function<double(double, double)> f);

  double operator()(double t, double x) const;
  bool time_invariant() const { return kind_ != Kind::Callable; }
  bool is_zero() const { return kind_ == Kind::Constant && p0_ == 0.0; }

 private:
  Kind kind_ = Kind::Constant;
  double p0_ = 0.0, p1_ = 0.0;
  std::vector<double> xs_, values_;
  std::function<double(double, double)> f_;
};

struct QuadratureNode {
  double x;
  double weight;
};

// Finite jump measure F on the mark space.
class JumpMeasure {
 public:
  enum class Kind { None, Atomic, TruncatedExponential };

  JumpMeasure() = default;
  static JumpMeasure none();
  static JumpMeasure atomic(std::vector<QuadratureNode> atoms);
  // intensity * rate e^{-rate x} / (1 - e^{-rate x_max}) on [0, x_max]
  static JumpMeasure truncated_exponential(double intensity, double rate, double x_max,
                                           std::size_t nodes = 64);

  Kind kind() const { return kind_; }
  bool empty() const { return intensity_ == 0.0; }
  double intensity() const { return intensity_; }
  // atoms, or Gauss-Legendre nodes with density folded into the weights
  std::span<const QuadratureNode> nodes() const { return nodes_; }
  double integrate(const std::function<double(double)>& g) const;
  // mark from a uniform in (0,1)
  double sample_mark(double u) const;

 private:
  Kind kind_ = Kind::None;
  double intensity_ = 0.0, rate_ = 0.0, x_max_ = 0.0;
  std::vector<QuadratureNode> nodes_;
  std::vector<double> cumulative_;
};

std::vector<QuadratureNode> gauss_legendre(std::size_t n, double a, double b);

}  // namespace hjm
