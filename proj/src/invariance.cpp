#include "hjm/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjm/drift.hpp"
#include "hjm/rng.hpp"

namespace hjm {

ConeReport cone_membership(const CurveFamily& f, double tol) {
  ConeReport rep;
  if (f.size() < 3) {
    rep.note = "fewer than two risky indices; ordering is vacuous";
    return rep;
  }
  for (std::size_t i = 1; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const auto vi = f[i].values(), vj = f[j].values();
      for (std::size_t k = 0; k < vi.size(); ++k) {
        const double gap = vj[k] - vi[k];
        if (!rep.worst || gap > rep.worst->gap)
          rep.worst = ConeViolation{i, j, f.grid_step() * static_cast<double>(k), gap};
      }
    }
  rep.member = rep.worst->gap <= tol;
  return rep;
}

namespace {

// smooth random curve; decays so norms stay moderate
std::vector<double> random_derivative(rng::Stream& s, double step, std::size_t n, double level) {
  double a[2], b[2], w[2];
  for (int q = 0; q < 2; ++q) {
    a[q] = level * (2.0 * s.uniform() - 1.0);
    b[q] = 0.5 + 2.0 * s.uniform();
    w[q] = 3.0 * s.uniform();
  }
  std::vector<double> d(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double x = step * static_cast<double>(k);
    for (int q = 0; q < 2; ++q)
      d[k] += a[q] * std::exp(-b[q] * x) * (-b[q] * std::cos(w[q] * x) - w[q] * std::sin(w[q] * x));
  }
  return d;
}

// s(xi) = a (xi - xi*)^2; linear derivative, so the trapezoid is exact and
// the spread vanishes at the node xi*
Curve parabola(double a, double xi_star, double step, std::size_t n) {
  std::vector<double> d(n + 1);
  for (std::size_t k = 0; k <= n; ++k) d[k] = 2.0 * a * (step * static_cast<double>(k) - xi_star);
  return Curve(a * xi_star * xi_star, std::move(d), step);
}

struct Sample {
  CurveFamily family;
  std::size_t i, j, k_star;  // touching pair and node; i == j means none
};

// h^m = base, h^{l} = h^{l+1} + spread_l, spreads nonnegative; the pair
// (i, j) touches at node k_star when every spread between them is a parabola
Sample sample_cone_family(const ModelSpec& spec, rng::Stream& s, const ConeCheckGrid& g, bool touch) {
  const std::size_t m = spec.m, n = g.intervals;
  const double step = g.step;
  std::size_t ti = 1, tj = 1, k_star = 0;
  if (touch && m >= 2) {
    ti = 1 + static_cast<std::size_t>(s.uniform() * static_cast<double>(m - 1));
    tj = ti + 1 + static_cast<std::size_t>(s.uniform() * static_cast<double>(m - ti));
    tj = std::min(tj, m);
    k_star = static_cast<std::size_t>(s.uniform() * static_cast<double>(n));
  }
  std::vector<Curve> cs(m + 1, Curve::constant(0.0, step, n));
  cs[0] = Curve(0.05 * (2.0 * s.uniform() - 1.0), random_derivative(s, step, n, 0.02), step);
  if (m == 0) return {CurveFamily(std::move(cs)), 0, 0, 0};
  cs[m] = Curve(0.05 * (2.0 * s.uniform() - 1.0), random_derivative(s, step, n, 0.02), step);
  for (std::size_t l = m - 1; l >= 1; --l) {
    const bool pinned = touch && l >= ti && l < tj;
    Curve spread = pinned ? parabola(0.01 * s.uniform(), step * static_cast<double>(k_star), step, n)
                          : Curve::constant(0.02 * s.uniform(), step, n) +
                                parabola(0.01 * s.uniform(), step * n * s.uniform(), step, n);
    cs[l] = cs[l + 1] + spread;
  }
  return {CurveFamily(std::move(cs)), touch ? ti : 0, touch ? tj : 0, k_star};
}

struct Tracker {
  ConeCoeffReport& rep;
  std::size_t slot;  // position in rep.checks
  void fail(double worst, ConeCounterexample ce) {
    auto& c = rep.checks[slot];
    if (c.pass || worst > c.worst) c.worst = worst;
    c.pass = false;
    if (!rep.counterexample) rep.counterexample = std::move(ce);
  }
};

}  // namespace

ConeCoeffReport check_cone_coeff_conditions(const ModelSpec& spec, std::size_t samples, std::uint64_t seed,
                                            const ConeCheckGrid& g) {
  spec.check_complete();
  ConeCoeffReport rep;
  const bool jumps = !spec.jumps.empty() && !spec.gamma.is_none();
  rep.checks = {{"cone-1", true, 0.0, jumps ? "" : "no jumps; vacuous"},
                {"cone-2", true, 0.0, ""},
                {"cone-4", true, 0.0, jumps ? "" : "no jumps; vacuous"},
                {"cone-3", true, 0.0, "sampled (t, h, xi) certificate"}};
  if (spec.m < 2) {
    for (auto& c : rep.checks) c.note = "fewer than two risky indices; vacuous";
    return rep;
  }
  Tracker c1{rep, 0}, c2{rep, 1}, c4{rep, 2}, c3{rep, 3};
  rng::Stream s(rng::key(seed, rng::kValidation, 0x434f4e45));
  const auto nodes = spec.jumps.nodes();
  const double tol = g.tol;

  // dominance of the loading of i over j on [0, xi*) according to its sign at xi*
  auto one_sided = [&](Tracker& tr, const char* name, const Curve& bi, const Curve& bj, const Sample& smp,
                       std::size_t factor, double mark) {
    const auto vi = bi.values(), vj = bj.values();
    const std::size_t k = smp.k_star;
    const double diff = vi[k] - vj[k];
    const double scale = std::max({1.0, std::abs(vi[k]), std::abs(vj[k])});
    ConeCounterexample ce{name, smp.i, smp.j, factor, g.step * static_cast<double>(k), g.step * static_cast<double>(k),
                          mark, 0.0, vi[k], vj[k], smp.family};
    if (std::abs(diff) > tol * scale) {
      tr.fail(std::abs(diff), ce);
      return;
    }
    if (std::abs(vi[k]) <= tol * scale) return;
    const double sign = vi[k] > 0.0 ? 1.0 : -1.0;
    for (std::size_t l = 0; l < k; ++l) {
      const double short_fall = -sign * (vi[l] - vj[l]);
      if (short_fall > tol * std::max({1.0, std::abs(vi[l]), std::abs(vj[l])})) {
        ce.condition = std::string(name) + (sign > 0 ? " (beta^i >= beta^j before xi*)" : " (beta^i <= beta^j before xi*)");
        ce.chi = g.step * static_cast<double>(l);
        ce.lhs = vi[l];
        ce.rhs = vj[l];
        tr.fail(short_fall, ce);
        return;
      }
    }
  };

  for (std::size_t n = 0; n < samples; ++n) {
    const bool touch = n % 4 != 3;
    const Sample smp = sample_cone_family(spec, s, g, touch);
    const CurveFamily& h = smp.family;
    const double t = g.horizon_t * s.uniform();

    if (jumps)
      for (const auto& q : nodes) {
        std::vector<Curve> moved;
        for (std::size_t i = 0; i <= spec.m; ++i) moved.push_back(h[i] + spec.gamma.gamma(h, i, q.x));
        const ConeReport cr = cone_membership(CurveFamily(std::move(moved)), tol);
        if (!cr.member)
          c1.fail(cr.worst->gap, {"cone-1", cr.worst->i, cr.worst->j, 0, cr.worst->xi, cr.worst->xi, q.x, t,
                                  0.0, cr.worst->gap, h});
      }
    if (!touch) continue;
    ++rep.touchings;
    const std::size_t i = smp.i, j = smp.j, k = smp.k_star;
    for (std::size_t f = 0; f < spec.d; ++f)
      one_sided(c2, "cone-2", spec.beta.beta(h, i, f), spec.beta.beta(h, j, f), smp, f, 0.0);
    if (jumps)
      for (const auto& q : nodes) one_sided(c4, "cone-4", spec.gamma.gamma(h, i, q.x), spec.gamma.gamma(h, j, q.x), smp, 0, q.x);

    const CurveFamily alpha = rw_drift(drift_inputs(h, t, spec));
    double lhs = alpha[i].values()[k] - alpha[j].values()[k];
    if (jumps)
      for (const auto& q : nodes)
        lhs -= q.weight * (spec.gamma.gamma(h, i, q.x).values()[k] - spec.gamma.gamma(h, j, q.x).values()[k]);
    const double scale = std::max({1.0, std::abs(alpha[i].values()[k]), std::abs(alpha[j].values()[k])});
    if (lhs < -tol * scale)
      c3.fail(-lhs, {"cone-3", i, j, 0, g.step * static_cast<double>(k), g.step * static_cast<double>(k), 0.0, t, lhs, 0.0, h});
  }
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckResult& c) { return c.pass; });
  return rep;
}

MonotonicityReport monotonicity_report(const PathEnsemble& ens, const ModelSpec& spec, double tol) {
  MonotonicityReport rep;
  ValidationGrid vg;
  vg.step = ens.dt;
  const OrderReport order = check_order_condition(spec, vg);
  rep.preconditions.push_back({"order_condition", order.pass, 0.0, order.pass ? "" : "drift ordering fails"});
  bool spots_ok = true;
  for (std::size_t i = 1; i < spec.m; ++i) spots_ok = spots_ok && spec.initial_spots[i] <= spec.initial_spots[i + 1];
  rep.preconditions.push_back({"initial_spots_ordered", spots_ok, 0.0, ""});
  const ConeReport k0 = cone_membership(spec.initial_family(ens.dt, 1000), 1e-12);
  rep.preconditions.push_back({"initial_family_in_cone", k0.member, k0.worst ? k0.worst->gap : 0.0, k0.note});
  if (spec.m < 2) return rep;

  const std::size_t M = ens.maturities().size();
  for (std::size_t p = 0; p < ens.paths(); ++p) {
    bool in_cone = true, spots_ordered = true, prices_ordered = true;
    for (std::size_t r = 0; r < ens.records(); ++r) {
      const double cg = ens.cone_gap(p, r);
      if (!std::isnan(cg) && cg > 1e-12) {
        ++rep.cone_violations;
        rep.worst_cone_gap = std::max(rep.worst_cone_gap, cg);
        in_cone = false;
      }
      for (std::size_t i = 1; i <= spec.m; ++i)
        for (std::size_t j = i + 1; j <= spec.m; ++j) {
          if (ens.spot(p, r, i) > ens.spot(p, r, j)) spots_ordered = false;
          for (std::size_t b = 0; b < M; ++b) {
            const double pi = ens.spot(p, r, i) * ens.bond_price(p, r, i, b);
            const double pj = ens.spot(p, r, j) * ens.bond_price(p, r, j, b);
            if (std::isnan(pi) || std::isnan(pj)) continue;
            ++rep.comparisons;
            const double gap = pi - pj;
            if (gap > tol * std::max({1.0, std::abs(pi), std::abs(pj)})) {
              ++rep.price_violations;
              prices_ordered = false;
              if (!rep.worst || gap > rep.worst->gap) rep.worst = PriceViolation{p, ens.times()[r], i, j, ens.maturities()[b], gap};
            }
          }
        }
    }
    if (in_cone && spots_ordered && !prices_ordered) ++rep.implication_failures;
  }
  rep.pass = rep.price_violations == 0 && rep.cone_violations == 0;
  return rep;
}

}  // namespace hjm
