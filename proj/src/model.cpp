#include "hjm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjm/errors.hpp"
#include "hjm/rng.hpp"

namespace hjm {

InitialCurve InitialCurve::flat(double v) {
  return {[v](double) { return v; }, [](double) { return 0.0; }};
}

InitialCurve InitialCurve::linear(double level, double slope) {
  return {[=](double x) { return level + slope * x; }, [=](double) { return slope; }};
}

InitialCurve InitialCurve::exponential(double level, double amplitude, double rate) {
  return {[=](double x) { return level + amplitude * std::exp(rate * x); },
          [=](double x) { return amplitude * rate * std::exp(rate * x); }};
}

InitialCurve InitialCurve::nelson_siegel(double b0, double b1, double b2, double tau) {
  if (!(tau > 0.0)) throw ParameterError("Nelson-Siegel tau must be positive");
  return {[=](double x) {
            const double u = x / tau;
            return b0 + b1 * std::exp(-u) + b2 * u * std::exp(-u);
          },
          [=](double x) {
            const double u = x / tau;
            return (-b1 + b2 * (1.0 - u)) * std::exp(-u) / tau;
          }};
}

Curve InitialCurve::build(double step, std::size_t intervals) const {
  return Curve::from_function(f, fprime, step, intervals);
}

Volatility Volatility::vasicek_exp(std::vector<std::vector<double>> scale, std::vector<double> decay) {
  if (scale.size() != decay.size()) throw SpecError("VasicekExp needs one decay rate per index");
  Volatility v;
  v.kind_ = Kind::VasicekExp;
  v.scale_ = std::move(scale);
  v.decay_ = std::move(decay);
  return v;
}

Volatility Volatility::state_dependent(Fn fn, bool state_independent) {
  Volatility v;
  v.kind_ = Kind::StateDependent;
  v.fn_ = std::move(fn);
  v.state_independent_ = state_independent;
  return v;
}

Curve Volatility::beta(const CurveFamily& h, std::size_t i, std::size_t k) const {
  if (kind_ == Kind::StateDependent) {
    Curve c = fn_(h, i, k);
    if (!c.same_grid(h[0])) throw GridError("volatility callable returned a curve off the state grid");
    return c;
  }
  const double c = scale_.at(i).at(k), d = decay_.at(i);
  return Curve::from_function([=](double x) { return c * std::exp(d * x); },
                              [=](double x) { return c * d * std::exp(d * x); }, h.grid_step(),
                              h.intervals());
}

double Volatility::analytic_norm_sq(std::size_t i, double rho) const {
  const double d = decay_.at(i);
  double acc = 0.0;
  for (double c : scale_.at(i)) acc += c * c * (1.0 + d * d / (-(2.0 * d + rho)));
  return acc;
}

JumpVolatility JumpVolatility::none() { return JumpVolatility{}; }

JumpVolatility JumpVolatility::exponential(std::vector<double> scale, std::vector<double> decay) {
  if (scale.size() != decay.size()) throw SpecError("jump volatility needs one decay rate per index");
  JumpVolatility g;
  g.kind_ = Kind::Exponential;
  g.scale_ = std::move(scale);
  g.decay_ = std::move(decay);
  return g;
}

JumpVolatility JumpVolatility::state_dependent(Fn fn, bool state_independent) {
  JumpVolatility g;
  g.kind_ = Kind::StateDependent;
  g.fn_ = std::move(fn);
  g.state_independent_ = state_independent;
  return g;
}

Curve JumpVolatility::gamma(const CurveFamily& h, std::size_t i, double x) const {
  switch (kind_) {
    case Kind::None: return Curve::constant(0.0, h.grid_step(), h.intervals());
    case Kind::Exponential: {
      const double c = x * scale_.at(i), d = decay_.at(i);
      return Curve::from_function([=](double u) { return c * std::exp(d * u); },
                                  [=](double u) { return c * d * std::exp(d * u); }, h.grid_step(),
                                  h.intervals());
    }
    case Kind::StateDependent: {
      Curve c = fn_(h, i, x);
      if (!c.same_grid(h[0])) throw GridError("jump volatility callable returned a curve off the state grid");
      return c;
    }
  }
  throw SpecError("unknown jump volatility kind");
}

void ModelSpec::check_complete() const {
  const std::size_t n = m + 1;
  if (d == 0) throw SpecError("at least one Brownian factor is required");
  if (spots.size() != n) throw SpecError("spot coefficients needed for every index 0..m");
  for (const auto& s : spots)
    if (s.b.size() != d) throw SpecError("spot loading b needs d components");
  if (market.lambda.size() != d) throw SpecError("market price of risk lambda needs d components");
  if (initial_curves.size() != n) throw SpecError("initial curve needed for every index");
  if (initial_spots.size() != n) throw SpecError("initial spot needed for every index");
  for (double s : initial_spots)
    if (!(s >= 0.0) || !std::isfinite(s)) throw SpecError("initial spots must be finite and nonnegative");
  if (beta.kind() == Volatility::Kind::VasicekExp) {
    if (beta.scale().size() != n) throw SpecError("VasicekExp scale needs m+1 rows");
    for (const auto& row : beta.scale())
      if (row.size() != d) throw SpecError("VasicekExp scale rows need d entries");
  }
  if (gamma.kind() == JumpVolatility::Kind::Exponential && gamma.scale().size() != n)
    throw SpecError("jump volatility needs m+1 entries");
}

double ModelSpec::lambda(std::size_t factor, double t) const {
  return measure == Measure::RiskNeutral ? 0.0 : market.lambda[factor](t);
}

double ModelSpec::psi(double t, double x) const {
  return measure == Measure::RiskNeutral ? 0.0 : market.psi(t, x);
}

bool ModelSpec::state_independent() const {
  return beta.state_independent() && gamma.state_independent();
}

bool ModelSpec::time_homogeneous() const {
  for (const auto& l : market.lambda)
    if (!l.is_constant()) return false;
  if (!market.psi.time_invariant()) return false;
  for (const auto& s : spots) {
    for (const auto& b : s.b)
      if (!b.is_constant()) return false;
    if (!s.c.time_invariant()) return false;
  }
  return true;
}

CurveFamily ModelSpec::initial_family(double step, std::size_t intervals) const {
  std::vector<Curve> cs;
  for (const auto& ic : initial_curves) cs.push_back(ic.build(step, intervals));
  return CurveFamily(std::move(cs));
}

ModelSpec zero_spec(std::size_t m, std::size_t d, double flat_rate) {
  ModelSpec s;
  s.m = m;
  s.d = d;
  s.short_rate = TimeFunction::constant(flat_rate);
  s.spots.assign(m + 1, SpotCoeffs{TimeFunction::constant(0.0),
                                   std::vector<TimeFunction>(d, TimeFunction::constant(0.0)),
                                   MarkFunction::constant(0.0)});
  s.market.lambda.assign(d, TimeFunction::constant(0.0));
  s.beta = Volatility::vasicek_exp(std::vector<std::vector<double>>(m + 1, std::vector<double>(d, 0.0)),
                                   std::vector<double>(m + 1, -1.0));
  s.initial_curves.assign(m + 1, InitialCurve::flat(flat_rate));
  s.initial_spots.assign(m + 1, 1.0);
  return s;
}

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult& ValidationReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw DomainError("no validation check named " + name);
}

CurveFamily random_family(std::size_t size, double step, std::size_t intervals, double rho,
                          double radius, std::uint64_t key) {
  rng::Stream s(key);
  std::vector<Curve> cs;
  for (std::size_t i = 0; i < size; ++i) {
    const double h0 = 2.0 * s.uniform() - 1.0;
    double a[3], b[3], w[3];
    for (int q = 0; q < 3; ++q) {
      a[q] = 2.0 * s.uniform() - 1.0;
      b[q] = 0.5 * rho + 0.5 + 2.5 * s.uniform();
      w[q] = 4.0 * s.uniform();
    }
    std::vector<double> d(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
      const double x = step * static_cast<double>(k);
      double acc = 0.0;
      for (int q = 0; q < 3; ++q) acc += a[q] * std::exp(-b[q] * x) * std::cos(w[q] * x);
      d[k] = acc;
    }
    Curve c(h0, std::move(d), step);
    const double n = norm(c, rho);
    const double target = radius * s.uniform();
    if (n > 0.0) c *= target / n;
    cs.push_back(std::move(c));
  }
  return CurveFamily(std::move(cs));
}

namespace {

std::vector<double> time_lattice(const ValidationGrid& g) {
  const auto n = static_cast<std::size_t>(std::llround(g.horizon_t / g.step));
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = g.step * static_cast<double>(k);
  return t;
}

double family_norm(const CurveFamily& h, double rho) {
  double acc = 0.0;
  for (const auto& c : h.curves()) {
    const double n = norm(c, rho);
    acc += n * n;
  }
  return std::sqrt(acc);
}

}  // namespace

ValidationReport validate_spec(const ModelSpec& spec, const SpaceParams& p, const ValidationGrid& grid) {
  spec.check_complete();
  const auto k = constants(p);
  const auto times = time_lattice(grid);
  const auto nodes = spec.jumps.nodes();
  const std::size_t n = spec.m + 1;
  ValidationReport rep;

  {
    CheckResult c{"riskless_index_zero", true, 0.0, ""};
    for (double t : times) {
      c.worst = std::max(c.worst, std::abs(spec.spots[0].a(t)));
      for (const auto& b : spec.spots[0].b) c.worst = std::max(c.worst, std::abs(b(t)));
      for (const auto& q : nodes) c.worst = std::max(c.worst, std::abs(spec.spots[0].c(t, q.x)));
    }
    c.pass = c.worst == 0.0;
    if (!c.pass) c.note = "a^0, b^0, c^0 must vanish";
    rep.checks.push_back(c);
  }
  {
    // margin above -1; FAIL when some sampled c or psi is <= -1
    CheckResult c{"jump_positivity", true, std::numeric_limits<double>::infinity(), ""};
    for (double t : times)
      for (const auto& q : nodes) {
        for (std::size_t i = 1; i < n; ++i) {
          const double v = spec.spots[i].c(t, q.x);
          if (!std::isfinite(v)) c.pass = false;
          c.worst = std::min(c.worst, v + 1.0);
        }
        const double ps = spec.market.psi(t, q.x);
        if (!std::isfinite(ps)) c.pass = false;
        c.worst = std::min(c.worst, ps + 1.0);
      }
    if (nodes.empty()) {
      c.worst = 0.0;
      c.note = "no jumps";
    } else if (!(c.worst > 0.0)) {
      c.pass = false;
      c.note = "c > -1 and psi > -1 required on every sampled mark";
    }
    rep.checks.push_back(c);
  }
  {
    CheckResult c{"est_psi_c", true, -std::numeric_limits<double>::infinity(), ""};
    if (nodes.empty()) {
      c.worst = 0.0;
      c.note = "no jumps";
    } else if (!spec.market.Lambda_bound) {
      c.pass = false;
      c.note = "jumps present but no Lambda bound configured";
    } else {
      const double L = *spec.market.Lambda_bound;
      for (double t : times)
        for (const auto& q : nodes)
          for (std::size_t i = 0; i < n; ++i) {
            const double lhs = std::abs((1.0 + spec.market.psi(t, q.x)) * (1.0 + spec.spots[i].c(t, q.x)));
            c.worst = std::max(c.worst, lhs - L * spec.market.kappa(0.0, q.x));
          }
      c.pass = c.worst <= 0.0;
    }
    rep.checks.push_back(c);
  }
  {
    CheckResult c{"beta_square_integrable", true, -std::numeric_limits<double>::infinity(), ""};
    if (spec.beta.kind() == Volatility::Kind::VasicekExp) {
      for (std::size_t i = 0; i < n; ++i) c.worst = std::max(c.worst, spec.beta.decay()[i] + 0.5 * p.rho);
      c.pass = c.worst < 0.0;
      if (!c.pass) c.note = "VasicekExp decay must satisfy delta < -rho/2";
    } else {
      c.worst = 0.0;
      c.note = "state dependent; covered by the sampled growth bound";
    }
    rep.checks.push_back(c);
  }

  const bool integrable = rep.checks.back().pass;
  std::vector<CurveFamily> samples;
  for (std::size_t s = 0; s < grid.curve_samples; ++s)
    samples.push_back(random_family(n, grid.step, grid.intervals, p.rho, grid.radius,
                                    rng::key(grid.seed, rng::kValidation, s)));
  samples.push_back(CurveFamily(std::vector<Curve>(n, Curve::constant(0.0, grid.step, grid.intervals))));

  {
    CheckResult c{"beta_growth", true, -std::numeric_limits<double>::infinity(), "sampled certificate"};
    std::optional<double> mb = spec.beta_growth_bound;
    if (!mb && spec.beta.kind() == Volatility::Kind::VasicekExp && integrable) {
      // beta does not depend on h, so M_beta = ||beta|| on the validation grid
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < spec.d; ++f) {
          const double b = norm(spec.beta.beta(samples.back(), i, f), p.rho);
          acc += b * b;
        }
      mb = std::sqrt(acc);
    }
    if (!integrable) {
      c.pass = false;
      c.worst = std::numeric_limits<double>::infinity();
      c.note = "beta norm diverges";
    } else if (!mb) {
      c.pass = false;
      c.note = "no growth bound M_beta configured";
    } else {
      for (const auto& h : samples) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t f = 0; f < spec.d; ++f) {
            const double b = norm(spec.beta.beta(h, i, f), p.rho);
            acc += b * b;
          }
        const double bound = *mb * std::sqrt(1.0 + family_norm(h, p.rho));
        c.worst = std::max(c.worst, std::sqrt(acc) - bound);
        if (std::sqrt(acc) > bound * (1.0 + 1e-9)) c.pass = false;
      }
    }
    rep.checks.push_back(c);
  }
  {
    CheckResult c{"gamma_bound", true, -std::numeric_limits<double>::infinity(), "sampled certificate"};
    if (nodes.empty() || spec.gamma.is_none()) {
      c.worst = 0.0;
      c.note = "no jumps";
    } else {
      for (const auto& h : samples)
        for (const auto& q : nodes) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double g = norm(spec.gamma.gamma(h, i, q.x), p.rho_prime);
            acc += g * g;
          }
          const double lhs = std::sqrt(acc);
          const double rhs = w_k_inverse(k.k_rho_rhop, spec.market.kappa(0.0, q.x) * (1.0 + family_norm(h, p.rho)));
          const double bound = std::min(rhs, spec.market.kappa(0.0, q.x) * (1.0 + family_norm(h, p.rho)));
          c.worst = std::max(c.worst, lhs - bound);
          if (lhs > bound * (1.0 + 1e-9)) c.pass = false;
        }
    }
    rep.checks.push_back(c);
  }
  return rep;
}

OrderReport check_order_condition(const ModelSpec& spec, const ValidationGrid& grid) {
  spec.check_complete();
  OrderReport rep;
  const auto times = time_lattice(grid);
  const auto nodes = spec.jumps.nodes();
  const std::size_t m = spec.m;

  CheckResult loads{"loading_equality", true, 0.0, ""};
  for (std::size_t i = 2; i <= m; ++i)
    for (double t : times) {
      for (std::size_t f = 0; f < spec.d; ++f)
        loads.worst = std::max(loads.worst, std::abs(spec.spots[i].b[f](t) - spec.spots[1].b[f](t)));
      for (const auto& q : nodes)
        loads.worst = std::max(loads.worst, std::abs(spec.spots[i].c(t, q.x) - spec.spots[1].c(t, q.x)));
    }
  loads.pass = loads.worst == 0.0;
  if (!loads.pass) loads.note = "b^i and c^i must agree across risky indices";

  CheckResult drift{"drift_ordering", true, 0.0, ""};
  if (spec.spot_drift == SpotDrift::Consistent) {
    drift.note = "spot drifts are endogenous; with equal loadings a^i - a^j = eta^j(0) - eta^i(0), so the ordering follows from cone membership";
  } else {
    for (std::size_t i = 1; i <= m && drift.pass; ++i)
      for (std::size_t j = i + 1; j <= m && drift.pass; ++j) {
        // cumulative trapezoid of a^i - a^j on the grid
        double acc = 0.0;
        for (std::size_t k = 1; k < times.size(); ++k) {
          const double t0 = times[k - 1], t1 = times[k];
          const double g0 = spec.spots[i].a(t0) - spec.spots[j].a(t0);
          const double g1 = spec.spots[i].a(t1) - spec.spots[j].a(t1);
          acc += 0.5 * (t1 - t0) * (g0 + g1);
          drift.worst = std::max(drift.worst, acc);
          if (acc > 0.0) {
            drift.pass = false;
            rep.i = i;
            rep.j = j;
            rep.t = t1;
            drift.note = "integrated drift of a lower index exceeds a higher one";
            break;
          }
        }
      }
  }
  rep.checks = {loads, drift};
  rep.pass = loads.pass && drift.pass;
  return rep;
}

}  // namespace hjm
