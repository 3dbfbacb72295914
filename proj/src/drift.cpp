#include "hjm/drift.hpp"

#include <cmath>

#include "hjm/errors.hpp"

namespace hjm {
namespace {

double lam(const DriftInputs& in, std::size_t f) {
  return in.mode == Measure::RiskNeutral ? 0.0 : in.spec.market.lambda[f](in.t);
}

double psi(const DriftInputs& in, double x) {
  return in.mode == Measure::RiskNeutral ? 0.0 : in.spec.market.psi(in.t, x);
}

double jump_c(const DriftInputs& in, std::size_t i, double x) {
  return i == 0 ? 0.0 : in.spec.spots[i].c(in.t, x);
}

double load_b(const DriftInputs& in, std::size_t i, std::size_t f) {
  return i == 0 ? 0.0 : in.spec.spots[i].b[f](in.t);
}

void require_finite(double v) {
  if (!std::isfinite(v))
    throw IntegrabilityError("jump integral against F is not finite on the sampled marks");
}

}  // namespace

DriftInputs drift_inputs(const CurveFamily& family, double t, const ModelSpec& spec) {
  return DriftInputs{family, t, spec, spec.measure};
}

CurveFamily rw_drift(const DriftInputs& in) {
  const auto& spec = in.spec;
  const auto& h = in.family;
  const double step = h.grid_step();
  const std::size_t n = h.intervals();
  std::vector<Curve> out;
  for (std::size_t i = 0; i <= spec.m; ++i) {
    Curve a = Curve::constant(spec.drift_bump, step, n);
    for (std::size_t f = 0; f < spec.d; ++f) {
      const Curve b = spec.beta.beta(h, i, f);
      a += product(b, integral_op(b));
      a.axpy(-(lam(in, f) + load_b(in, i, f)), b);
    }
    if (!spec.gamma.is_none()) {
      for (const auto& q : spec.jumps.nodes()) {
        const Curve g = spec.gamma.gamma(h, i, q.x);
        const double k = (1.0 + psi(in, q.x)) * (1.0 + jump_c(in, i, q.x));
        require_finite(k * q.weight);
        const Curve e = compose(integral_op(g), [k](double u) { return 1.0 - k * std::exp(-u); },
                                [k](double u) { return k * std::exp(-u); });
        a.axpy(q.weight, product(g, e));
      }
    }
    for (double v : a.values()) require_finite(v);
    out.push_back(std::move(a));
  }
  return CurveFamily(std::move(out));
}

std::vector<double> short_end_drift(const DriftInputs& in) {
  const auto& spec = in.spec;
  const double r = spec.spot_drift == SpotDrift::Consistent ? in.family[0].h0() : spec.short_rate(in.t);
  std::vector<double> a(spec.m + 1);
  for (std::size_t i = 0; i <= spec.m; ++i) {
    double v = r - in.family[i].h0();
    for (std::size_t f = 0; f < spec.d; ++f) v -= lam(in, f) * load_b(in, i, f);
    for (const auto& q : spec.jumps.nodes()) v -= q.weight * jump_c(in, i, q.x) * psi(in, q.x);
    a[i] = v;
  }
  return a;
}

std::vector<double> integrated_drift_residual(const DriftInputs& in, double T) {
  const auto& spec = in.spec;
  const double tau = T - in.t;
  if (tau < 0.0) throw DomainError("maturity before evaluation time");
  const auto alpha = rw_drift(in);
  std::vector<double> res(spec.m + 1);
  for (std::size_t i = 0; i <= spec.m; ++i) {
    const double lhs = integrate(alpha[i], tau);
    double rhs = 0.0;
    for (std::size_t f = 0; f < spec.d; ++f) {
      const double bb = integrate(spec.beta.beta(in.family, i, f), tau);
      rhs += 0.5 * bb * bb - bb * (load_b(in, i, f) + lam(in, f));
    }
    if (!spec.gamma.is_none()) {
      for (const auto& q : spec.jumps.nodes()) {
        const double gb = integrate(spec.gamma.gamma(in.family, i, q.x), tau);
        const double k = (1.0 + psi(in, q.x)) * (1.0 + jump_c(in, i, q.x));
        rhs += q.weight * (k * std::expm1(-gb) + gb);
      }
    }
    res[i] = lhs - rhs;
  }
  return res;
}

std::vector<JumpIntegrability> jump_integrability_check(const DriftInputs& in, double T) {
  const auto& spec = in.spec;
  const double tau = T - in.t;
  if (tau < 0.0) throw DomainError("maturity before evaluation time");
  std::vector<JumpIntegrability> out(spec.m + 1);
  for (std::size_t i = 0; i <= spec.m; ++i) {
    auto& r = out[i];
    for (const auto& q : spec.jumps.nodes()) {
      const double gb = spec.gamma.is_none() ? 0.0 : integrate(spec.gamma.gamma(in.family, i, q.x), tau);
      const double c = jump_c(in, i, q.x);
      if (!(c > 2.0 * std::exp(gb) - 1.0)) continue;
      ++r.active;
      r.value += q.weight * ((1.0 + c) * std::exp(-gb) - 1.0) * (1.0 + psi(in, q.x));
    }
    r.pass = std::isfinite(r.value);
  }
  return out;
}

}  // namespace hjm
