#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjm/curve.hpp"
#include "hjm/functions.hpp"

namespace hjm {

enum class Measure { RealWorld, RiskNeutral };

// Consistent: r = eta^0(0) and a^i from the short-end drift condition each
// step. Specified: r and a^i are the configured time functions.
enum class SpotDrift { Consistent, Specified };

struct InitialCurve {
  std::function<double(double)> f;
  std::function<double(double)> fprime;

  static InitialCurve flat(double v);
  static InitialCurve linear(double level, double slope);
  static InitialCurve exponential(double level, double amplitude, double rate);
  static InitialCurve nelson_siegel(double b0, double b1, double b2, double tau);

  Curve build(double step, std::size_t intervals) const;
};

class Volatility {
 public:
  enum class Kind { VasicekExp, StateDependent };
  using Fn = std::function<Curve(const CurveFamily&, std::size_t index, std::size_t factor)>;

  Volatility() = default;
  // beta^{i,k}(xi) = scale[i][k] * exp(decay[i] * xi)
  static Volatility vasicek_exp(std::vector<std::vector<double>> scale, std::vector<double> decay);
  static Volatility state_dependent(Fn fn, bool state_independent = false);

  Kind kind() const { return kind_; }
  Curve beta(const CurveFamily& h, std::size_t i, std::size_t k) const;
  bool state_independent() const { return state_independent_; }
  const std::vector<std::vector<double>>& scale() const { return scale_; }
  const std::vector<double>& decay() const { return decay_; }
  // ||c e^{delta .}||_rho^2 = c^2 (1 + delta^2 / -(2 delta + rho))
  double analytic_norm_sq(std::size_t i, double rho) const;

 private:
  Kind kind_ = Kind::VasicekExp;
  std::vector<std::vector<double>> scale_;
  std::vector<double> decay_;
  Fn fn_;
  bool state_independent_ = true;
};

class JumpVolatility {
 public:
  enum class Kind { None, Exponential, StateDependent };
  using Fn = std::function<Curve(const CurveFamily&, std::size_t index, double mark)>;

  JumpVolatility() = default;
  static JumpVolatility none();
  // gamma^i(x)(xi) = x * scale[i] * exp(decay[i] * xi)
  static JumpVolatility exponential(std::vector<double> scale, std::vector<double> decay);
  static JumpVolatility state_dependent(Fn fn, bool state_independent = false);

  Kind kind() const { return kind_; }
  bool is_none() const { return kind_ == Kind::None; }
  Curve gamma(const CurveFamily& h, std::size_t i, double x) const;
  bool state_independent() const { return state_independent_; }
  const std::vector<double>& scale() const { return scale_; }
  const std::vector<double>& decay() const { return decay_; }

 private:
  Kind kind_ = Kind::None;
  std::vector<double> scale_, decay_;
  Fn fn_;
  bool state_independent_ = true;
};

struct SpotCoeffs {
  TimeFunction a;
  std::vector<TimeFunction> b;  // d loadings
  MarkFunction c;
};

struct MarketPrice {
  std::vector<TimeFunction> lambda;  // d loadings
  MarkFunction psi;
  std::optional<double> Lambda_bound;
  MarkFunction kappa = MarkFunction::constant(1.0);
};

struct ModelSpec {
  std::size_t m = 0;
  std::size_t d = 1;
  Measure measure = Measure::RealWorld;
  SpotDrift spot_drift = SpotDrift::Consistent;
  // constant added to every forward drift curve; zero for a correctly specified model
  double drift_bump = 0.0;

  TimeFunction short_rate;
  std::vector<SpotCoeffs> spots;
  MarketPrice market;
  JumpMeasure jumps;
  Volatility beta;
  JumpVolatility gamma;

  std::vector<InitialCurve> initial_curves;
  std::vector<double> initial_spots;
  std::optional<double> beta_growth_bound;

  void check_complete() const;
  double lambda(std::size_t factor, double t) const;
  double psi(double t, double x) const;
  bool state_independent() const;
  bool time_homogeneous() const;
  CurveFamily initial_family(double step, std::size_t intervals) const;
};

// A zero-coefficient spec with m risky indices, d factors and flat initial curves.
ModelSpec zero_spec(std::size_t m, std::size_t d, double flat_rate);

struct CheckResult {
  std::string name;
  bool pass = true;
  double worst = 0.0;
  std::string note;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  const CheckResult& get(const std::string& name) const;
};

struct ValidationGrid {
  double step = 0.01;
  std::size_t intervals = 1000;
  double horizon_t = 1.0;
  std::size_t curve_samples = 32;
  double radius = 1.0;
  std::uint64_t seed = 42;
};

ValidationReport validate_spec(const ModelSpec& spec, const SpaceParams& p, const ValidationGrid& grid);

struct OrderReport {
  bool pass = true;
  std::vector<CheckResult> checks;
  // first violation of the drift ordering, if any
  std::optional<std::size_t> i, j;
  std::optional<double> t;
};

OrderReport check_order_condition(const ModelSpec& spec, const ValidationGrid& grid);

// Random family whose members have rho-norm up to radius, for sampled certificates.
CurveFamily random_family(std::size_t size, double step, std::size_t intervals, double rho,
                          double radius, std::uint64_t key);

}  // namespace hjm
