#include "hjm/mmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hjm/errors.hpp"
#include "hjm/rng.hpp"

namespace hjm {

namespace {

constexpr double kLargeExponent = 700.0;

double g_of(double q) { return q / std::expm1(q); }

double g_prime(double q) {
  const double e = std::expm1(q);
  return (e - q * (e + 1.0)) / (e * e);
}

}  // namespace

void MmmParams::validate() const {
  if (!(alpha0 > 0.0)) throw ParameterError("alpha0 must be positive");
  if (!(eta > 0.0)) throw ParameterError("eta must be positive");
  if (!(x0 > 0.0)) throw ParameterError("initial discounted GOP must be positive");
  if (a.empty() || spots0.size() != a.size()) throw ParameterError("need a spot drift and initial spot per index");
  for (double s : spots0)
    if (!(s > 0.0)) throw ParameterError("MMM spots must be strictly positive");
}

double MmmParams::alpha_star(double t) const { return alpha0 * std::exp(eta * t); }

double phi_time(const MmmParams& p, double t) {
  if (t < 0.0) throw DomainError("phi needs t >= 0");
  return p.alpha0 / (4.0 * p.eta) * std::expm1(p.eta * t);
}

double mprc_complement(const MmmParams& p, double t, double T, double xbar) {
  if (!(T > t)) throw DomainError("market price of risk contribution needs T > t");
  if (!(xbar > 0.0)) throw DomainError("market price of risk contribution needs xbar > 0");
  return std::exp(-xbar / (2.0 * (phi_time(p, T) - phi_time(p, t))));
}

double mprc(const MmmParams& p, double t, double T, double xbar) {
  if (!(T > t)) throw DomainError("market price of risk contribution needs T > t");
  if (!(xbar > 0.0)) throw DomainError("market price of risk contribution needs xbar > 0");
  return -std::expm1(-xbar / (2.0 * (phi_time(p, T) - phi_time(p, t))));
}

double mprc_forward(const MmmParams& p, double t, double T, double xbar) {
  const double dphi = phi_time(p, T) - phi_time(p, t);
  if (dphi <= 0.0) return 0.0;
  const double q = xbar / (2.0 * dphi);
  if (q > kLargeExponent) return 0.0;
  const double phi1 = p.alpha0 / 4.0 * std::exp(p.eta * T);
  return phi1 / dphi * g_of(q);
}

double mprc_forward_slope(const MmmParams& p, double t, double T, double xbar) {
  const double dphi = phi_time(p, T) - phi_time(p, t);
  if (dphi <= 0.0) return 0.0;
  const double q = xbar / (2.0 * dphi);
  if (q > kLargeExponent) return 0.0;
  const double phi1 = p.alpha0 / 4.0 * std::exp(p.eta * T);
  const double phi2 = p.eta * phi1;
  const double ratio = phi1 / dphi;
  return (phi2 / dphi - ratio * ratio) * g_of(q) + ratio * g_prime(q) * (-q * ratio);
}

double gop_step(double xbar, const MmmParams& p, double t, double dt, double dW) {
  const double a = p.alpha_star(t);
  return xbar + a * dt + std::sqrt(std::max(xbar, 0.0) * a) * dW;
}

double bond0_mmm(const MmmParams& p, double t, double T, double xbar) {
  return std::exp(-p.r.integral(t, T)) * mprc(p, t, T, xbar);
}

double bond_mmm(const MmmParams& p, std::size_t i, double t, double T, double xbar) {
  if (T == t) return 1.0;
  const double spread = i == 0 ? 0.0 : p.a[i].integral(t, T);
  return bond0_mmm(p, t, T, xbar) * std::exp(spread);
}

double spot_mmm(const MmmParams& p, std::size_t i, double t) {
  return i == 0 ? 1.0 : p.spots0[i] * std::exp(p.a[i].integral(0.0, t));
}

Curve forward_curve_mmm(const MmmParams& p, std::size_t i, double t, double xbar, double step, std::size_t intervals) {
  auto f = [&](double xi) {
    const double T = t + xi;
    return p.r(T) + mprc_forward(p, t, T, xbar) - (i == 0 ? 0.0 : p.a[i](T));
  };
  auto fp = [&](double xi) {
    const double T = t + xi;
    return p.r.derivative(T) + mprc_forward_slope(p, t, T, xbar) - (i == 0 ? 0.0 : p.a[i].derivative(T));
  };
  return Curve::from_function(f, fp, step, intervals);
}

GopPaths simulate_gop(const MmmParams& p, double dt, double horizon, std::size_t n_paths, std::uint64_t seed,
                      std::size_t threads, std::size_t record_every) {
  p.validate();
  const SimulationGrid g{dt, horizon, horizon, 0.0};
  g.validate();
  const std::size_t steps = g.steps();
  record_every = std::max<std::size_t>(1, record_every);
  GopPaths out;
  std::vector<std::size_t> rs;
  for (std::size_t s = 0; s <= steps; s += record_every) rs.push_back(s);
  if (rs.back() != steps) rs.push_back(steps);
  for (auto s : rs) out.times.push_back(dt * static_cast<double>(s));
  out.paths = n_paths;
  out.xbar.assign(n_paths * rs.size(), 0.0);
  std::vector<std::size_t> trunc(n_paths, 0);
  const double sq = std::sqrt(dt);
  run_parallel(n_paths, threads, [&](std::size_t path) {
    double x = p.x0;
    std::size_t r = 0;
    out.xbar[path * rs.size() + r++] = x;
    for (std::size_t k = 0; k < steps; ++k) {
      if (x < 0.0) ++trunc[path];
      x = gop_step(x, p, dt * static_cast<double>(k), dt, sq * rng::normal(rng::key(seed, rng::kBrownian, path, k), 0));
      if (r < rs.size() && rs[r] == k + 1) out.xbar[path * rs.size() + r++] = x;
    }
  });
  for (auto t : trunc) out.truncated_steps += t;
  out.total_steps = n_paths * steps;
  return out;
}

RatioEstimate expected_ratio(const MmmParams& p, double t, double T, std::size_t n_paths, double dt,
                             std::uint64_t seed, std::size_t threads) {
  if (!(T > t)) throw DomainError("expected ratio needs T > t");
  if (n_paths < 2) throw InsufficientSampleError("expected ratio needs at least two paths");
  // record only at multiples of gcd(t, T) in steps
  const auto st = static_cast<std::size_t>(std::llround(t / dt)), sT = static_cast<std::size_t>(std::llround(T / dt));
  const std::size_t every = std::max<std::size_t>(1, std::gcd(st, sT));
  const GopPaths g = simulate_gop(p, dt, T, n_paths, seed, threads, every);
  const std::size_t rt = st / every, rT = g.times.size() - 1;
  if (std::abs(g.times[rt] - t) > 1e-9 * std::max(1.0, t)) throw GridError("t must lie on the time grid");
  RatioEstimate e;
  e.t = t;
  e.T = T;
  double s = 0.0, q = 0.0, o = 0.0, oc = 0.0;
  for (std::size_t k = 0; k < n_paths; ++k) {
    const double xt = g.at(k, rt), ratio = xt / g.at(k, rT);
    s += ratio;
    q += ratio * ratio;
    o += xt > 0.0 ? mprc(p, t, T, xt) : 0.0;
    oc += xt > 0.0 ? mprc_complement(p, t, T, xt) : 1.0;
  }
  const double n = static_cast<double>(n_paths);
  e.mean = s / n;
  e.se = std::sqrt(std::max(0.0, (q - n * e.mean * e.mean) / (n - 1.0)) / n);
  e.oracle = o / n;
  e.oracle_complement = oc / n;
  e.z = e.se > 0.0 ? (e.mean - e.oracle) / e.se : 0.0;
  e.within_3se = std::abs(e.mean - e.oracle) <= 3.0 * e.se;
  e.mc_below_one = e.mean + 3.0 * e.se < 1.0;
  e.closed_form_below_one = e.oracle_complement > 0.0;
  e.truncation_rate = g.total_steps ? static_cast<double>(g.truncated_steps) / static_cast<double>(g.total_steps) : 0.0;
  return e;
}

PathEnsemble mmm_ensemble(const MmmParams& p, const GopPaths& gop, const std::vector<double>& maturities) {
  p.validate();
  const double dt = gop.times.size() > 1 ? gop.times[1] - gop.times[0] : 1.0;
  std::vector<std::size_t> steps;
  for (double t : gop.times) steps.push_back(static_cast<std::size_t>(std::llround(t / dt)));
  const std::size_t I = p.indices(), M = maturities.size();
  PathEnsemble ens(gop.paths, steps, dt, I, maturities, 0);
  std::vector<double> spots(I), shorts(I), bonds(I * M);
  for (std::size_t path = 0; path < gop.paths; ++path)
    for (std::size_t r = 0; r < gop.times.size(); ++r) {
      const double t = gop.times[r], x = gop.at(path, r);
      for (std::size_t i = 0; i < I; ++i) {
        spots[i] = spot_mmm(p, i, t);
        shorts[i] = p.r(t) - (i == 0 ? 0.0 : p.a[i](t));
        for (std::size_t j = 0; j < M; ++j) {
          const double T = maturities[j];
          bonds[i * M + j] = T < t - 1e-9 ? std::nan("") : (T <= t + 1e-12 ? 1.0 : bond_mmm(p, i, t, T, x));
        }
      }
      ens.record_scalars(path, r, spots.data(), shorts.data(), std::exp(p.r.integral(0.0, t)), 1.0 / x, bonds.data(),
                         std::nan(""));
    }
  return ens;
}

ModelSpec mmm_model_spec(const MmmParams& p) {
  p.validate();
  const std::size_t m = p.indices() - 1;
  ModelSpec s = zero_spec(m, 1, 0.0);
  s.spot_drift = SpotDrift::Specified;
  s.short_rate = p.r;
  s.initial_spots = p.spots0;
  s.initial_spots[0] = 1.0;
  s.initial_curves.clear();
  for (std::size_t i = 0; i <= m; ++i) {
    if (i > 0) s.spots[i].a = p.a[i];
    const MmmParams q = p;
    s.initial_curves.push_back(
        {[q, i](double xi) { return q.r(xi) + mprc_forward(q, 0.0, xi, q.x0) - (i == 0 ? 0.0 : q.a[i](xi)); },
         [q, i](double xi) {
           return q.r.derivative(xi) + mprc_forward_slope(q, 0.0, xi, q.x0) - (i == 0 ? 0.0 : q.a[i].derivative(xi));
         }});
  }
  return s;
}

}  // namespace hjm
