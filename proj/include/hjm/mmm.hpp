#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hjm/curve.hpp"
#include "hjm/functions.hpp"
#include "hjm/model.hpp"
#include "hjm/solver.hpp"

namespace hjm {

// Stylized minimal market model with deterministic r and spot drifts a^i.
struct MmmParams {
  double alpha0 = 0.04;
  double eta = 0.1;
  TimeFunction r = TimeFunction::constant(0.0);
  std::vector<TimeFunction> a{TimeFunction::constant(0.0)};  // a[0] unused
  std::vector<double> spots0{1.0};
  double x0 = 1.0;

  void validate() const;
  std::size_t indices() const { return a.size(); }
  double alpha_star(double t) const;
};

// alpha0/(4 eta) (e^{eta t} - 1)
double phi_time(const MmmParams& p, double t);
// 1 - exp(-xbar / (2 (phi(T) - phi(t))))
double mprc(const MmmParams& p, double t, double T, double xbar);
// 1 - M, exact where M rounds to one
double mprc_complement(const MmmParams& p, double t, double T, double xbar);
// m(t,T) = -d/dT ln M and its T-derivative
double mprc_forward(const MmmParams& p, double t, double T, double xbar);
double mprc_forward_slope(const MmmParams& p, double t, double T, double xbar);

// full-truncation Euler; the stored value may dip below zero, the diffusion uses its positive part
double gop_step(double xbar, const MmmParams& p, double t, double dt, double dW);

double bond0_mmm(const MmmParams& p, double t, double T, double xbar);
// B^0(t,T) exp(int_t^T a^i)
double bond_mmm(const MmmParams& p, std::size_t i, double t, double T, double xbar);
double spot_mmm(const MmmParams& p, std::size_t i, double t);
// f^i(t, t+xi) = r(t+xi) + m(t, t+xi) - a^i(t+xi)
Curve forward_curve_mmm(const MmmParams& p, std::size_t i, double t, double xbar, double step, std::size_t intervals);

struct GopPaths {
  std::vector<double> times;
  std::size_t paths = 0;
  std::vector<double> xbar;  // [p * times.size() + r]
  std::size_t truncated_steps = 0;
  std::size_t total_steps = 0;
  double at(std::size_t path, std::size_t r) const { return xbar[path * times.size() + r]; }
};

GopPaths simulate_gop(const MmmParams& p, double dt, double horizon, std::size_t n_paths, std::uint64_t seed,
                      std::size_t threads = 1, std::size_t record_every = 1);

struct RatioEstimate {
  double t = 0.0, T = 0.0;
  double mean = 0.0;    // MC E[xbar_t / xbar_T]
  double se = 0.0;
  double oracle = 0.0;  // E[M(t,T,xbar_t)]
  double oracle_complement = 0.0;
  double z = 0.0;
  bool within_3se = false;
  bool mc_below_one = false;  // mean + 3 se < 1
  bool closed_form_below_one = false;
  double truncation_rate = 0.0;
};

RatioEstimate expected_ratio(const MmmParams& p, double t, double T, std::size_t n_paths, double dt,
                             std::uint64_t seed, std::size_t threads = 1);

// Ensemble view for the deflator and invariance modules: deflator 1/xbar,
// numeraire exp(int r), deterministic spots, analytic bond prices.
PathEnsemble mmm_ensemble(const MmmParams& p, const GopPaths& gop, const std::vector<double>& maturities);
// deterministic model spec with the MMM initial curves, for order and cone preconditions
ModelSpec mmm_model_spec(const MmmParams& p);

}  // namespace hjm
