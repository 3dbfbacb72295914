#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hjm {

// Forward curve in Musiela coordinates. Stored as h(0) plus samples of h' on
// nodes xi_k = k*step, k = 0..intervals. Values are the cumulative trapezoid
// of the derivative and are cached.
class Curve {
 public:
  Curve(double h0, std::vector<double> derivative, double grid_step);

  static Curve constant(double value, double grid_step, std::size_t intervals);
  static Curve from_function(const std::function<double(double)>& f,
                             const std::function<double(double)>& fprime,
                             double grid_step, std::size_t intervals);

  // trusted constructor for kernels that update derivative and values together
  static Curve from_parts(std::vector<double> derivative, std::vector<double> values, double grid_step);

  double h0() const { return values_.front(); }
  double grid_step() const { return step_; }
  std::size_t intervals() const { return deriv_.size() - 1; }
  double horizon() const { return step_ * static_cast<double>(intervals()); }
  std::span<const double> derivative() const { return deriv_; }
  std::span<const double> values() const { return values_; }

  double operator()(double xi) const;

  // leading part of the curve on [0, n*step]
  Curve truncated(std::size_t n) const;

  Curve& operator+=(const Curve& o);
  Curve& operator-=(const Curve& o);
  Curve& operator*=(double s);
  Curve& axpy(double s, const Curve& x);  // *this += s*x

  bool same_grid(const Curve& o) const;

 private:
  struct Raw {};
  Curve(Raw, std::vector<double> derivative, std::vector<double> values, double grid_step);
  void rebuild_values(double h0);

  std::vector<double> deriv_;
  std::vector<double> values_;
  double step_;

  friend Curve shift(const Curve&, double);
};

Curve operator+(Curve a, const Curve& b);
Curve operator-(Curve a, const Curve& b);
Curve operator*(double s, Curve c);

struct SpaceParams {
  double rho = 1.0;
  double rho_prime = 2.0;
};

struct SpaceConstants {
  double c_rho;
  double c_rho_rhop;
  double k_rho_rhop;
};

struct VWValues {
  double v;
  double w_inv;
  double w_small;
};

double norm(const Curve& c, double rho);
double eval(const Curve& c, double xi);
Curve integral_op(const Curve& c);
Curve product(const Curve& a, const Curve& b);
Curve shift(const Curve& c, double t);
// pointwise f(h) with derivative f'(h) h'
Curve compose(const Curve& c, const std::function<double(double)>& f,
              const std::function<double(double)>& fprime);
// int_0^tau h, consistent with eval(integral_op(c), tau)
double integrate(const Curve& c, double tau);

SpaceConstants constants(const SpaceParams& p);
double v_k(double k, double r);
double w_k_inverse(double k, double r);
VWValues v_w_functions(double k, double r);

class CurveFamily {
 public:
  explicit CurveFamily(std::vector<Curve> curves);

  std::size_t size() const { return curves_.size(); }
  std::size_t m() const { return curves_.size() - 1; }
  const Curve& operator[](std::size_t i) const { return curves_[i]; }
  Curve& operator[](std::size_t i) { return curves_[i]; }
  double grid_step() const { return curves_.front().grid_step(); }
  std::size_t intervals() const { return curves_.front().intervals(); }
  double horizon() const { return curves_.front().horizon(); }
  const std::vector<Curve>& curves() const { return curves_; }

 private:
  std::vector<Curve> curves_;
};

}  // namespace hjm
