#pragma once

#include <cstddef>
#include <vector>

#include "hjm/curve.hpp"
#include "hjm/functions.hpp"
#include "hjm/model.hpp"
#include "hjm/solver.hpp"

namespace hjm {

// beta^i = c_i e^{delta_i xi}, one Brownian driver, no jumps
struct AffineSpec {
  std::vector<double> c;
  std::vector<double> delta;
  CurveFamily h0;
  TimeFunction lambda;
  std::vector<TimeFunction> b;  // b[0] is ignored (riskless index)

  void validate(double rho = 1.0) const;
  std::size_t indices() const { return c.size(); }
};

AffineSpec affine_from_model(const ModelSpec& spec, double step, std::size_t intervals, double rho = 1.0);
// real-world spec with Consistent spot drift whose curve dynamics are those of a
ModelSpec affine_model(const AffineSpec& a);

// h0(t+xi) - h0(t) e^{delta xi} + c^2/(2 delta^2) (e^{2 delta t} - 1)(e^{delta xi} - 1) e^{delta xi}
Curve phi_curve(const AffineSpec& a, std::size_t i, double t);
// h0'(t) - delta h0(t) + c^2/(2 delta) (e^{2 delta t} - 1), h0' from the stored derivative
double kappa(const AffineSpec& a, std::size_t i, double t);

std::vector<double> realize_step(const std::vector<double>& z, const AffineSpec& a, double t, double dt, double dW,
                                 double lambda_t, const std::vector<double>& b_t);
CurveFamily reconstruct(const std::vector<double>& z, const AffineSpec& a, double t);

struct RealizationGap {
  double max_gap = 0.0;
  std::size_t worst_path = 0;
  double worst_t = 0.0;
  double worst_xi = 0.0;
  double max_short_end_pin = 0.0;  // max |reconstructed(0) - z|
};

// full SPDE and the affine state driven by the same increments
RealizationGap realization_gap(const SimulationConfig& cfg, const AffineSpec& a);

// exact moments of z^i_t for constant lambda and b
struct OuMoments {
  double mean;
  double variance;
};
OuMoments ou_moments(const AffineSpec& a, std::size_t i, double t);

}  // namespace hjm
