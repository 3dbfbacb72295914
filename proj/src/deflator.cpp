#include "hjm/deflator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjm/drift.hpp"
#include "hjm/errors.hpp"

namespace hjm {

double lmd_step(double z, double dt, const StepInputs& in, const ModelSpec& spec, double t) {
  double expo = 0.0;
  for (std::size_t f = 0; f < spec.d; ++f) {
    const double l = spec.lambda(f, t);
    expo += l * in.dW[f] - 0.5 * l * l * dt;
  }
  double jf = 1.0;
  if (!spec.jumps.empty()) {
    for (const auto& q : spec.jumps.nodes()) expo -= dt * q.weight * spec.psi(t, q.x);
    for (const auto& e : in.jumps)
      for (std::size_t c = 0; c < e.count; ++c) jf *= 1.0 + spec.psi(t, e.mark);
  }
  return z * std::exp(expo) * jf;
}

DeflatedSeries::DeflatedSeries(std::vector<double> times, std::vector<std::size_t> indices,
                               std::vector<double> maturities, std::size_t paths)
    : times_(std::move(times)), indices_(std::move(indices)), maturities_(std::move(maturities)), paths_(paths) {
  values_.assign(indices_.size() * maturities_.size() * paths_ * times_.size(),
                 std::numeric_limits<double>::quiet_NaN());
}

DeflatedSeries deflated_series(const PathEnsemble& ens, const std::vector<double>& maturities,
                               const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> cols;
  for (double T : maturities) {
    auto j = ens.maturity_index(T);
    if (!j) throw DomainError("maturity " + std::to_string(T) + " was not recorded");
    cols.push_back(*j);
  }
  for (auto i : indices)
    if (i >= ens.indices()) throw ParameterError("index out of range");
  DeflatedSeries s(ens.times(), indices, maturities, ens.paths());
  for (std::size_t a = 0; a < indices.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      for (std::size_t p = 0; p < ens.paths(); ++p)
        for (std::size_t r = 0; r < ens.records(); ++r) {
          const std::size_t i = indices[a];
          s.at(a, b, p, r) = ens.deflator(p, r) / ens.numeraire(p, r) * ens.spot(p, r, i) *
                             ens.bond_price(p, r, i, cols[b]);
        }
  return s;
}

std::vector<ZScore> martingale_zscore(const DeflatedSeries& s, double t) {
  std::size_t r = s.times().size();
  for (std::size_t k = 0; k < s.times().size(); ++k)
    if (std::abs(s.times()[k] - t) <= 1e-9 * std::max(1.0, t)) r = k;
  if (r == s.times().size()) throw DomainError("time " + std::to_string(t) + " is not a record time");
  std::vector<ZScore> out;
  for (std::size_t a = 0; a < s.indices().size(); ++a)
    for (std::size_t b = 0; b < s.maturities().size(); ++b) {
      if (s.maturities()[b] < t - 1e-9) continue;
      double sum = 0.0, sq = 0.0, v0 = 0.0;
      std::size_t n = 0;
      for (std::size_t p = 0; p < s.paths(); ++p) {
        const double x = s.at(a, b, p, r);
        if (std::isnan(x)) continue;
        sum += x;
        sq += x * x;
        v0 += s.at(a, b, p, 0);
        ++n;
      }
      if (n < 2) throw InsufficientSampleError("martingale test needs at least two paths");
      const double mean = sum / static_cast<double>(n);
      const double var = std::max(0.0, (sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
      const double se = std::sqrt(var / static_cast<double>(n));
      v0 /= static_cast<double>(n);
      double z;
      if (se > 0.0)
        z = (mean - v0) / se;
      else
        z = mean == v0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean - v0);
      out.push_back({s.indices()[a], s.maturities()[b], s.times()[r], mean, v0, se, z, std::abs(z) <= 3.0});
    }
  return out;
}

namespace {

// integrated coefficients over [0, tau] for one index
struct Bars {
  double alpha = 0.0;
  std::vector<double> beta;
  double gamma_comp = 0.0;         // int gammabar F(dx)
  std::vector<double> gamma_atom;  // gammabar per atom
};

Bars make_bars(const CurveFamily& h, double t, double tau, const ModelSpec& spec, std::size_t i, bool jumps) {
  Bars b;
  b.alpha = integrate(rw_drift(drift_inputs(h, t, spec))[i], tau);
  for (std::size_t f = 0; f < spec.d; ++f) b.beta.push_back(integrate(spec.beta.beta(h, i, f), tau));
  if (jumps)
    for (const auto& q : spec.jumps.nodes()) {
      const double g = integrate(spec.gamma.gamma(h, i, q.x), tau);
      b.gamma_comp += q.weight * g;
      if (spec.jumps.kind() == JumpMeasure::Kind::Atomic) b.gamma_atom.push_back(g);
    }
  return b;
}

}  // namespace

YCheckResult y_representation_check(const SimulationConfig& cfg, const ModelSpec& spec, std::size_t i, double T) {
  if (i > spec.m) throw ParameterError("index out of range");
  if (T < 0.0 || T > cfg.grid.horizon_xi) throw DomainError("maturity outside the maturity grid");
  cfg.grid.validate();
  const PathState init = initial_state(spec, cfg.grid);
  const double start = init.spots[i] * bond_price(init.family[i], T);
  const auto nodes = spec.jumps.nodes();
  const bool jumps = !spec.jumps.empty() && !spec.gamma.is_none();
  const double dt = cfg.grid.dt;

  // coefficients shared by all paths when they do not depend on the state;
  // the prefix property makes full-grid integrals equal the shifted ones
  std::vector<Bars> shared;
  if (spec.state_independent() && spec.time_homogeneous())
    for (std::size_t k = 0; k < cfg.grid.steps() && dt * static_cast<double>(k) < T; ++k)
      shared.push_back(make_bars(init.family, dt * static_cast<double>(k), T - dt * static_cast<double>(k), spec, i, jumps));

  std::vector<double> log_e(cfg.n_paths, 0.0), gap(cfg.n_paths, 0.0), gap_t(cfg.n_paths, 0.0);
  std::vector<char> done(cfg.n_paths, 0);
  simulate_paths(cfg, spec, [&](std::size_t p, std::size_t k, const PathState& s, const StepInputs& in,
                                const PathState& next) {
    if (done[p] || next.t > T + 1e-9 * std::max(1.0, T)) {
      done[p] = 1;
      return;
    }
    const double tau = T - s.t;
    const auto& h = s.family;
    Bars local;
    const Bars* bars = &local;
    if (k < shared.size())
      bars = &shared[k];
    else
      local = make_bars(h, s.t, tau, spec, i, jumps);

    std::vector<double> shorts(spec.m + 1);
    for (std::size_t j = 0; j <= spec.m; ++j) shorts[j] = h[j].h0();
    const double r = short_rate_at(spec, s.t, shorts.data());
    const double a = i == 0 ? 0.0 : spot_drift_at(spec, s.t, shorts.data(), i);

    double dy = dt * (a - r + shorts[i] - bars->alpha), qv = 0.0;
    for (std::size_t f = 0; f < spec.d; ++f) {
      const double bbar = bars->beta[f];
      const double b = i == 0 ? 0.0 : spec.spots[i].b[f](s.t);
      dy += (b - bbar) * in.dW[f] + dt * (0.5 * bbar * bbar - bbar * b);
      qv += (b - bbar) * (b - bbar);
    }
    dy += dt * bars->gamma_comp;
    double jump = 0.0;
    for (const auto& q : nodes) dy -= dt * q.weight * (i == 0 ? 0.0 : spec.spots[i].c(s.t, q.x));
    for (const auto& e : in.jumps) {
      const double c = i == 0 ? 0.0 : spec.spots[i].c(s.t, e.mark);
      double gbar = 0.0;
      if (jumps) {
        bool found = false;
        for (std::size_t q = 0; q < bars->gamma_atom.size(); ++q)
          if (nodes[q].x == e.mark) {
            gbar = bars->gamma_atom[q];
            found = true;
          }
        if (!found) gbar = integrate(spec.gamma.gamma(h, i, e.mark), tau);
      }
      jump += static_cast<double>(e.count) * (std::log1p(c) - gbar);
    }
    log_e[p] += dy - 0.5 * qv * dt + jump;

    const double direct = next.spots[i] * bond_price(next.family[i], T - next.t) / next.numeraire;
    const double via = start * std::exp(log_e[p]);
    const double g = direct == 0.0 ? (via == 0.0 ? 0.0 : 1.0) : std::abs(direct - via) / std::abs(direct);
    if (g > gap[p]) {
      gap[p] = g;
      gap_t[p] = next.t;
    }
  });
  YCheckResult res;
  for (std::size_t p = 0; p < cfg.n_paths; ++p)
    if (gap[p] > res.max_gap) {
      res.max_gap = gap[p];
      res.worst_path = p;
      res.worst_t = gap_t[p];
    }
  return res;
}

}  // namespace hjm
