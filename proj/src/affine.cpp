#include "hjm/affine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hjm/errors.hpp"

namespace hjm {

namespace {

Curve exp_curve(double rate, double step, std::size_t n) {
  return Curve::from_function([rate](double x) { return std::exp(rate * x); },
                              [rate](double x) { return rate * std::exp(rate * x); }, step, n);
}

// linear interpolation of the stored derivative samples
double derivative_at(const Curve& c, double xi) {
  const auto d = c.derivative();
  const double s = xi / c.grid_step();
  const double k = std::floor(s);
  if (k >= static_cast<double>(d.size() - 1)) return d.back();
  const auto j = static_cast<std::size_t>(k);
  const double w = s - k;
  return w == 0.0 ? d[j] : (1.0 - w) * d[j] + w * d[j + 1];
}

}  // namespace

void AffineSpec::validate(double rho) const {
  const std::size_t n = c.size();
  if (n == 0 || delta.size() != n || h0.size() != n || b.size() != n)
    throw SpecError("affine spec needs c, delta, h0 and b for every index");
  for (std::size_t i = 0; i < n; ++i)
    if (!(delta[i] < -rho / 2.0))
      throw SpecError("delta_" + std::to_string(i) + " must be below -rho/2 for square integrability");
}

AffineSpec affine_from_model(const ModelSpec& spec, double step, std::size_t intervals, double rho) {
  spec.check_complete();
  if (spec.beta.kind() != Volatility::Kind::VasicekExp) throw SpecError("affine realization needs VasicekExp volatility");
  if (spec.d != 1) throw SpecError("affine realization uses one Brownian driver");
  if (!spec.jumps.empty() && !spec.gamma.is_none()) throw SpecError("affine realization does not cover curve jumps");
  if (spec.drift_bump != 0.0) throw SpecError("affine realization needs the consistent drift");
  AffineSpec a{{}, spec.beta.decay(), spec.initial_family(step, intervals), TimeFunction::constant(0.0), {}};
  for (std::size_t i = 0; i <= spec.m; ++i) {
    a.c.push_back(spec.beta.scale()[i][0]);
    a.b.push_back(i == 0 ? TimeFunction::constant(0.0) : spec.spots[i].b[0]);
  }
  if (spec.measure == Measure::RealWorld) a.lambda = spec.market.lambda[0];
  a.validate(rho);
  return a;
}

ModelSpec affine_model(const AffineSpec& a) {
  a.validate();
  const std::size_t m = a.indices() - 1;
  ModelSpec s = zero_spec(m, 1, 0.0);
  std::vector<std::vector<double>> scale;
  for (double ci : a.c) scale.push_back({ci});
  s.beta = Volatility::vasicek_exp(scale, a.delta);
  s.market.lambda = {a.lambda};
  for (std::size_t i = 1; i <= m; ++i) s.spots[i].b = {a.b[i]};
  s.initial_curves.clear();
  for (std::size_t i = 0; i <= m; ++i) {
    const Curve h = a.h0[i];
    s.initial_curves.push_back({[h](double x) { return eval(h, x); }, [h](double x) { return derivative_at(h, x); }});
  }
  return s;
}

Curve phi_curve(const AffineSpec& a, std::size_t i, double t) {
  const Curve& h = a.h0[i];
  if (t < 0.0 || t > h.horizon() * (1.0 + 1e-12)) throw DomainError("phi needs t within the h0 horizon");
  Curve out = shift(h, t);
  const double d = a.delta[i];
  const Curve e1 = exp_curve(d, out.grid_step(), out.intervals());
  const Curve e2 = exp_curve(2.0 * d, out.grid_step(), out.intervals());
  const double k = a.c[i] * a.c[i] / (2.0 * d * d) * std::expm1(2.0 * d * t);
  out.axpy(-eval(h, t), e1);
  out.axpy(k, e2);
  out.axpy(-k, e1);
  return out;
}

double kappa(const AffineSpec& a, std::size_t i, double t) {
  const double d = a.delta[i];
  return derivative_at(a.h0[i], t) - d * eval(a.h0[i], t) + a.c[i] * a.c[i] / (2.0 * d) * std::expm1(2.0 * d * t);
}

std::vector<double> realize_step(const std::vector<double>& z, const AffineSpec& a, double t, double dt, double dW,
                                 double lambda_t, const std::vector<double>& b_t) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double b = i == 0 ? 0.0 : b_t[i];
    const double mu = -a.c[i] * (lambda_t + b) + kappa(a, i, t) + a.delta[i] * z[i];
    out[i] = z[i] + mu * dt + a.c[i] * dW;
  }
  return out;
}

CurveFamily reconstruct(const std::vector<double>& z, const AffineSpec& a, double t) {
  std::vector<Curve> cs;
  for (std::size_t i = 0; i < a.indices(); ++i) {
    Curve c = phi_curve(a, i, t);
    c.axpy(z[i], exp_curve(a.delta[i], c.grid_step(), c.intervals()));
    cs.push_back(std::move(c));
  }
  return CurveFamily(std::move(cs));
}

RealizationGap realization_gap(const SimulationConfig& cfg, const AffineSpec& a) {
  a.validate();
  cfg.grid.validate();
  if (std::abs(cfg.grid.dt - a.h0.grid_step()) > 1e-12 * cfg.grid.dt || a.h0.intervals() != cfg.grid.xi_intervals())
    throw GridError("affine h0 grid does not match the simulation grid");
  const ModelSpec spec = affine_model(a);
  std::vector<std::vector<double>> z(cfg.n_paths);
  std::vector<RealizationGap> per(cfg.n_paths);
  std::vector<Curve> E1, E2;
  for (std::size_t i = 0; i < a.indices(); ++i) {
    E1.push_back(exp_curve(a.delta[i], a.h0.grid_step(), a.h0.intervals()));
    E2.push_back(exp_curve(2.0 * a.delta[i], a.h0.grid_step(), a.h0.intervals()));
  }
  for (auto& zp : z)
    for (std::size_t i = 0; i < a.indices(); ++i) zp.push_back(a.h0[i].h0());
  simulate_paths(cfg, spec, [&](std::size_t p, std::size_t, const PathState& s, const StepInputs& in,
                                const PathState& next) {
    std::vector<double> b(a.indices());
    for (std::size_t i = 1; i < a.indices(); ++i) b[i] = a.b[i](s.t);
    z[p] = realize_step(z[p], a, s.t, cfg.grid.dt, in.dW[0], a.lambda(s.t), b);
    RealizationGap& g = per[p];
    for (std::size_t i = 0; i < a.indices(); ++i) {
      // reconstruct() with the exponential curves taken as prefixes of the cached ones
      const Curve sh = shift(a.h0[i], next.t);
      const auto hv = sh.values(), v = next.family[i].values(), e1 = E1[i].values(), e2 = E2[i].values();
      const double k2 = a.c[i] * a.c[i] / (2.0 * a.delta[i] * a.delta[i]) * std::expm1(2.0 * a.delta[i] * next.t);
      const double k1 = z[p][i] - eval(a.h0[i], next.t) - k2;
      for (std::size_t k = 0; k < v.size(); ++k) {
        const double u = hv[k] + k1 * e1[k] + k2 * e2[k];
        if (k == 0) g.max_short_end_pin = std::max(g.max_short_end_pin, std::abs(u - z[p][i]));
        const double e = std::abs(u - v[k]);
        if (e > g.max_gap) {
          g.max_gap = e;
          g.worst_path = p;
          g.worst_t = next.t;
          g.worst_xi = cfg.grid.dt * static_cast<double>(k);
        }
      }
    }
  });
  RealizationGap out;
  for (const auto& g : per) {
    out.max_short_end_pin = std::max(out.max_short_end_pin, g.max_short_end_pin);
    if (g.max_gap > out.max_gap) {
      const double pin = out.max_short_end_pin;
      out = g;
      out.max_short_end_pin = pin;
    }
  }
  return out;
}

OuMoments ou_moments(const AffineSpec& a, std::size_t i, double t) {
  const double c = a.c[i], d = a.delta[i];
  const double lb = a.lambda(0.0) + (i == 0 ? 0.0 : a.b[i](0.0));
  const double e = std::expm1(d * t);
  return {eval(a.h0[i], t) + c * c / (2.0 * d * d) * e * e - c * lb * e / d, c * c * std::expm1(2.0 * d * t) / (2.0 * d)};
}

}  // namespace hjm
