#include "hjm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "hjm/deflator.hpp"
#include "hjm/drift.hpp"
#include "hjm/errors.hpp"
#include "hjm/rng.hpp"

namespace hjm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t whole_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double n = std::nearbyint(r);
  if (!(n >= 0.0) || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw GridError(std::string(what) + " is not a whole number of steps");
  return static_cast<std::size_t>(n);
}

// Coefficient curves for one step. Cached curves may live on a longer grid
// than the state; the kernel only reads the leading nodes.
struct StepCoefficients {
  std::vector<Curve> alpha;               // [i]
  std::vector<std::vector<Curve>> beta;   // [i][f]
  std::vector<Curve> comp;                // [i], dt-free compensator int gamma dF
  bool has_comp = false;
};

class Stepper {
 public:
  Stepper(const ModelSpec& spec, double dt, const CurveFamily& initial, bool cache)
      : spec_(spec), dt_(dt) {
    cache_beta_ = cache && spec.state_independent();
    cache_alpha_ = cache_beta_ && spec.time_homogeneous();
    jumps_active_ = !spec.jumps.empty() && !spec.gamma.is_none();
    if (cache_beta_) {
      full_ = fill(initial, 0.0, cache_alpha_);
      if (jumps_active_ && spec.jumps.kind() == JumpMeasure::Kind::Atomic)
        for (const auto& q : spec.jumps.nodes()) {
          std::vector<Curve> g;
          for (std::size_t i = 0; i <= spec.m; ++i) g.push_back(spec.gamma.gamma(initial, i, q.x));
          atom_gamma_.push_back(std::move(g));
        }
    }
  }

  StepCoefficients fill(const CurveFamily& h, double t, bool with_alpha) const {
    StepCoefficients c;
    if (with_alpha) c.alpha = rw_drift(drift_inputs(h, t, spec_)).curves();
    c.beta.resize(spec_.m + 1);
    for (std::size_t i = 0; i <= spec_.m; ++i)
      for (std::size_t f = 0; f < spec_.d; ++f) c.beta[i].push_back(spec_.beta.beta(h, i, f));
    if (jumps_active_) {
      c.has_comp = true;
      for (std::size_t i = 0; i <= spec_.m; ++i) {
        Curve acc = Curve::constant(0.0, h.grid_step(), h.intervals());
        for (const auto& q : spec_.jumps.nodes()) acc.axpy(q.weight, spec_.gamma.gamma(h, i, q.x));
        c.comp.push_back(std::move(acc));
      }
    }
    return c;
  }

  // gamma^i for a realized mark; cached atoms are on the full grid
  Curve event_gamma(const CurveFamily& h, std::size_t i, double x) const {
    if (!atom_gamma_.empty()) {
      const auto nodes = spec_.jumps.nodes();
      for (std::size_t a = 0; a < nodes.size(); ++a)
        if (nodes[a].x == x) return atom_gamma_[a][i];
    }
    return spec_.gamma.gamma(h, i, x);
  }

  bool cached() const { return cache_beta_; }
  const StepCoefficients& full() const { return full_; }

  PathState step(const PathState& s, const StepInputs& in) const {
    const CurveFamily& h = s.family;
    const std::size_t nc = h.intervals();
    if (nc == 0) throw GridError("maturity horizon exhausted; increase horizon_xi");
    if (in.dW.size() != spec_.d) throw ParameterError("step inputs need d Brownian increments");

    StepCoefficients local;
    const StepCoefficients* co = &full_;
    if (!cache_beta_) {
      local = fill(h, s.t, true);
      co = &local;
    } else if (!cache_alpha_) {
      local.alpha = rw_drift(drift_inputs(h, s.t, spec_)).curves();
    }
    const std::vector<Curve>& alpha = cache_alpha_ ? full_.alpha : (cache_beta_ ? local.alpha : co->alpha);

    std::vector<std::vector<Curve>> ev_gamma;
    if (jumps_active_)
      for (const auto& e : in.jumps) {
        std::vector<Curve> g;
        for (std::size_t i = 0; i <= spec_.m; ++i) g.push_back(event_gamma(h, i, e.mark));
        ev_gamma.push_back(std::move(g));
      }

    std::vector<Curve> next;
    next.reserve(spec_.m + 1);
    for (std::size_t i = 0; i <= spec_.m; ++i) {
      const auto d0 = h[i].derivative(), v0 = h[i].values();
      const auto ad = alpha[i].derivative(), av = alpha[i].values();
      std::vector<double> d(nc), v(nc);
      for (std::size_t l = 0; l < nc; ++l) {
        d[l] = d0[l + 1] + dt_ * ad[l + 1];
        v[l] = v0[l + 1] + dt_ * av[l + 1];
      }
      for (std::size_t f = 0; f < spec_.d; ++f) {
        const auto bd = co->beta[i][f].derivative(), bv = co->beta[i][f].values();
        const double w = in.dW[f];
        for (std::size_t l = 0; l < nc; ++l) {
          d[l] += w * bd[l + 1];
          v[l] += w * bv[l + 1];
        }
      }
      for (std::size_t e = 0; e < ev_gamma.size(); ++e) {
        const auto gd = ev_gamma[e][i].derivative(), gv = ev_gamma[e][i].values();
        const double w = static_cast<double>(in.jumps[e].count);
        for (std::size_t l = 0; l < nc; ++l) {
          d[l] += w * gd[l + 1];
          v[l] += w * gv[l + 1];
        }
      }
      if (co->has_comp) {
        const auto cd = co->comp[i].derivative(), cv = co->comp[i].values();
        for (std::size_t l = 0; l < nc; ++l) {
          d[l] -= dt_ * cd[l + 1];
          v[l] -= dt_ * cv[l + 1];
        }
      }
      next.push_back(Curve::from_parts(std::move(d), std::move(v), h.grid_step()));
    }

    std::vector<double> shorts(spec_.m + 1);
    for (std::size_t i = 0; i <= spec_.m; ++i) shorts[i] = h[i].h0();
    PathState out{s.t + dt_, CurveFamily(std::move(next)), s.spots, s.numeraire, s.deflator};
    advance_scalars(spec_, s.t, dt_, shorts.data(), in, out.spots.data(), out.numeraire, out.deflator);
    return out;
  }

  // spots, numeraire and deflator over one step given the pre-step short ends
  static void advance_scalars(const ModelSpec& spec, double t, double dt, const double* shorts,
                              const StepInputs& in, double* spots, double& numeraire, double& deflator) {
    const auto nodes = spec.jumps.nodes();
    const double r = short_rate_at(spec, t, shorts);
    for (std::size_t i = 1; i <= spec.m; ++i) {
      if (spots[i] == 0.0) continue;
      const auto& sc = spec.spots[i];
      const double a = spot_drift_at(spec, t, shorts, i);
      double cont = 1.0 + a * dt;
      for (std::size_t f = 0; f < spec.d; ++f) cont += sc.b[f](t) * in.dW[f];
      double comp = 0.0;
      for (const auto& q : nodes) comp += q.weight * sc.c(t, q.x);
      cont -= dt * comp;
      if (cont < 0.0)
        throw SchemeViolationError("spot " + std::to_string(i) + " would turn negative at t=" + std::to_string(t) +
                                   " without a c=-1 jump; reduce dt");
      double jf = 1.0;
      for (const auto& e : in.jumps)
        for (std::size_t c = 0; c < e.count; ++c) jf *= 1.0 + sc.c(t, e.mark);
      spots[i] = std::max(0.0, spots[i] * cont * jf);
    }
    numeraire *= std::exp(r * dt);
    deflator = lmd_step(deflator, dt, in, spec, t);
  }

 private:
  const ModelSpec& spec_;
  double dt_;
  bool cache_beta_ = false, cache_alpha_ = false, jumps_active_ = false;
  StepCoefficients full_;
  std::vector<std::vector<Curve>> atom_gamma_;  // [atom][i]
};

void check_dt(double dt, const CurveFamily& f) {
  if (std::abs(dt - f.grid_step()) > 1e-12 * f.grid_step())
    throw GridError("dt must equal the maturity grid step so the shift is exact");
}

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < n; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

struct Kernel {
  std::vector<double> v;    // values on the full grid
  std::vector<double> pre;  // pre[j] = sum_{l<j} v[l]
  explicit Kernel(std::span<const double> vals) : v(vals.begin(), vals.end()), pre(vals.size() + 1, 0.0) {
    for (std::size_t j = 0; j < v.size(); ++j) pre[j + 1] = pre[j] + v[j];
  }
  // trapezoid of v over nodes s..s+J, in units of the grid step
  double trap(std::size_t s, std::size_t J) const {
    return (pre[s + J + 1] - pre[s]) - 0.5 * (v[s] + v[s + J]);
  }
};

}  // namespace

std::size_t SimulationGrid::steps() const { return whole_ratio(horizon_t, dt, "horizon_t"); }
std::size_t SimulationGrid::xi_intervals() const { return whole_ratio(horizon_xi, dt, "horizon_xi"); }
std::size_t SimulationGrid::noise_substeps() const {
  return noise_dt > 0.0 ? whole_ratio(dt, noise_dt, "dt / noise_dt") : 1;
}

void SimulationGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw GridError("dt must be positive");
  if (!(horizon_t >= 0.0)) throw GridError("horizon_t must be nonnegative");
  if (!(horizon_xi >= horizon_t)) throw GridError("horizon_xi must cover horizon_t");
  if (noise_dt < 0.0) throw GridError("noise_dt must be nonnegative");
  steps();
  xi_intervals();
  if (noise_substeps() == 0) throw GridError("noise_dt must not exceed dt");
}

PathState initial_state(const ModelSpec& spec, const SimulationGrid& grid) {
  spec.check_complete();
  PathState s{0.0, spec.initial_family(grid.dt, grid.xi_intervals()), spec.initial_spots, 1.0, 1.0};
  s.spots[0] = 1.0;
  return s;
}

PathState euler_step(const PathState& s, double dt, const StepInputs& in, const ModelSpec& spec) {
  check_dt(dt, s.family);
  return Stepper(spec, dt, s.family, false).step(s, in);
}

double bond_price(const Curve& c, double tau) {
  if (tau < 0.0 || tau > c.horizon() * (1.0 + 1e-12)) throw DomainError("bond maturity outside the curve horizon");
  return std::exp(-integrate(c, tau));
}

double short_rate_at(const ModelSpec& spec, double t, const double* shorts) {
  return spec.spot_drift == SpotDrift::Consistent ? shorts[0] : spec.short_rate(t);
}

double spot_drift_at(const ModelSpec& spec, double t, const double* shorts, std::size_t i) {
  const auto& sc = spec.spots[i];
  if (spec.spot_drift == SpotDrift::Specified) return sc.a(t);
  double a = shorts[0] - shorts[i];
  for (std::size_t f = 0; f < spec.d; ++f) a -= spec.lambda(f, t) * sc.b[f](t);
  for (const auto& q : spec.jumps.nodes()) a -= q.weight * sc.c(t, q.x) * spec.psi(t, q.x);
  return a;
}

double cone_gap(const CurveFamily& f) {
  double g = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const auto vi = f[i].values(), vj = f[j].values();
      for (std::size_t k = 0; k < vi.size(); ++k) g = std::max(g, vj[k] - vi[k]);
    }
  return f.size() < 3 ? kNaN : g;
}

NoiseSource::NoiseSource(const SimulationConfig& cfg, const ModelSpec& spec, std::size_t path)
    : seed_(cfg.seed), path_(path), d_(spec.d), substeps_(cfg.grid.noise_substeps()) {
  const double nd = cfg.grid.dt / static_cast<double>(substeps_);
  sqrt_noise_dt_ = std::sqrt(nd);
  if (spec.jumps.empty()) return;
  const std::size_t steps = cfg.grid.steps();
  rng::Stream st(rng::key(seed_, rng::kJumps, path));
  double tau = 0.0;
  for (;;) {
    tau -= std::log(st.uniform()) / spec.jumps.intensity();
    if (tau > cfg.grid.horizon_t) break;
    const double mark = spec.jumps.sample_mark(st.uniform());
    auto k = static_cast<std::size_t>(std::floor(tau / cfg.grid.dt));
    if (k >= steps) k = steps - 1;
    events_.emplace_back(k, mark);
  }
}

void NoiseSource::brownian(std::size_t k, std::vector<double>& dW) const {
  dW.assign(d_, 0.0);
  for (std::size_t l = 0; l < substeps_; ++l) {
    const std::uint64_t key = rng::key(seed_, rng::kBrownian, path_, k * substeps_ + l);
    for (std::size_t f = 0; f < d_; ++f) dW[f] += rng::normal(key, f);
  }
  for (auto& w : dW) w *= sqrt_noise_dt_;
}

StepInputs NoiseSource::step(std::size_t k) const {
  StepInputs in;
  brownian(k, in.dW);
  auto it = std::lower_bound(events_.begin(), events_.end(), std::make_pair(k, -std::numeric_limits<double>::infinity()));
  for (; it != events_.end() && it->first == k; ++it) in.jumps.push_back({it->second, 1});
  return in;
}

PathEnsemble::PathEnsemble(std::size_t paths, std::vector<std::size_t> record_steps, double dt_,
                           std::size_t indices, std::vector<double> maturities, std::size_t store_curves_paths)
    : dt(dt_), paths_(paths), indices_(indices), steps_(std::move(record_steps)),
      maturities_(std::move(maturities)), store_paths_(std::min(store_curves_paths, paths)) {
  for (auto s : steps_) times_.push_back(dt * static_cast<double>(s));
  const std::size_t pr = paths_ * steps_.size();
  spots_.assign(pr * indices_, 0.0);
  shorts_.assign(pr * indices_, 0.0);
  numeraire_.assign(pr, 0.0);
  deflator_.assign(pr, 0.0);
  cone_gap_.assign(pr, kNaN);
  bonds_.assign(pr * indices_ * maturities_.size(), kNaN);
  families_.resize(store_paths_ * steps_.size());
}

std::size_t PathEnsemble::estimate_bytes(std::size_t paths, std::size_t records, std::size_t indices,
                                         std::size_t maturities) {
  return paths * records * (2 * indices + 3 + indices * maturities) * sizeof(double);
}

std::optional<std::size_t> PathEnsemble::record_at(double t) const {
  for (std::size_t r = 0; r < times_.size(); ++r)
    if (std::abs(times_[r] - t) <= 1e-9 * std::max(1.0, t)) return r;
  return std::nullopt;
}

std::optional<std::size_t> PathEnsemble::maturity_index(double T) const {
  for (std::size_t j = 0; j < maturities_.size(); ++j)
    if (std::abs(maturities_[j] - T) <= 1e-9 * std::max(1.0, T)) return j;
  return std::nullopt;
}

const CurveFamily* PathEnsemble::family(std::size_t p, std::size_t r) const {
  if (p >= store_paths_) return nullptr;
  const auto& f = families_[p * steps_.size() + r];
  return f ? &*f : nullptr;
}

void PathEnsemble::record_scalars(std::size_t p, std::size_t r, const double* spots, const double* shorts,
                                  double numeraire, double deflator, const double* bonds, double gap) {
  const std::size_t pr = p * records() + r;
  std::copy(spots, spots + indices_, spots_.begin() + static_cast<std::ptrdiff_t>(pr * indices_));
  std::copy(shorts, shorts + indices_, shorts_.begin() + static_cast<std::ptrdiff_t>(pr * indices_));
  numeraire_[pr] = numeraire;
  deflator_[pr] = deflator;
  cone_gap_[pr] = gap;
  const std::size_t nb = indices_ * maturities_.size();
  std::copy(bonds, bonds + nb, bonds_.begin() + static_cast<std::ptrdiff_t>(pr * nb));
}

void PathEnsemble::record(std::size_t p, std::size_t r, const PathState& s, bool keep_family) {
  std::vector<double> shorts(indices_), bonds(indices_ * maturities_.size(), kNaN);
  for (std::size_t i = 0; i < indices_; ++i) {
    shorts[i] = s.family[i].h0();
    for (std::size_t j = 0; j < maturities_.size(); ++j) {
      const double tau = maturities_[j] - times_[r];
      if (tau < -1e-9 * std::max(1.0, maturities_[j])) continue;
      bonds[i * maturities_.size() + j] = hjm::bond_price(s.family[i], std::max(0.0, tau));
    }
  }
  record_scalars(p, r, s.spots.data(), shorts.data(), s.numeraire, s.deflator, bonds.data(), keep_family ? hjm::cone_gap(s.family) : kNaN);
  if (p < store_paths_) families_[p * steps_.size() + r] = s.family;
}

std::vector<std::size_t> record_schedule(const SimulationConfig& cfg) {
  const std::size_t steps = cfg.grid.steps();
  const std::size_t every = cfg.record_every > 0 ? cfg.record_every : std::max<std::size_t>(1, steps / 10);
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s <= steps; s += every) out.push_back(s);
  if (out.back() != steps) out.push_back(steps);
  return out;
}

void run_parallel(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::size_t> first_bad(threads, n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t lo = n * w / threads, hi = n * (w + 1) / threads;
    pool.emplace_back([&, w, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          first_bad[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  // the failure with the lowest path index wins, independent of scheduling
  std::size_t best = threads;
  for (std::size_t w = 0; w < threads; ++w)
    if (errors[w] && (best == threads || first_bad[w] < first_bad[best])) best = w;
  if (best < threads) std::rethrow_exception(errors[best]);
}

namespace {

void check_maturities(const SimulationConfig& cfg) {
  for (double T : cfg.maturities) {
    if (T < 0.0 || T > cfg.grid.horizon_xi * (1.0 + 1e-12))
      throw DomainError("maturity outside the maturity grid");
    whole_ratio(T, cfg.grid.dt, "maturity");
  }
}

PathEnsemble make_ensemble(const SimulationConfig& cfg, const ModelSpec& spec) {
  cfg.grid.validate();
  check_maturities(cfg);
  auto steps = record_schedule(cfg);
  const std::size_t bytes = PathEnsemble::estimate_bytes(cfg.n_paths, steps.size(), spec.m + 1, cfg.maturities.size());
  if (bytes > cfg.max_ensemble_bytes) throw ResourceError("ensemble too large; raise record_every or lower n_paths");
  return PathEnsemble(cfg.n_paths, std::move(steps), cfg.grid.dt, spec.m + 1, cfg.maturities, cfg.store_curves_paths);
}

void simulate_stepping(const SimulationConfig& cfg, const ModelSpec& spec, PathEnsemble& ens) {
  const PathState init = initial_state(spec, cfg.grid);
  const Stepper stepper(spec, cfg.grid.dt, init.family, true);
  const std::size_t steps = cfg.grid.steps();
  const bool cone = cfg.track_cone && spec.m >= 2;
  run_parallel(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    const NoiseSource noise(cfg, spec, p);
    PathState s = init;
    std::size_t r = 0;
    const auto& rs = ens.record_steps();
    if (rs[r] == 0) ens.record(p, r++, s, cone);
    for (std::size_t k = 0; k < steps; ++k) {
      s = stepper.step(s, noise.step(k));
      if (r < rs.size() && rs[r] == k + 1) ens.record(p, r++, s, cone);
    }
  });
}

// Same discrete scheme for state-independent coefficients, evaluated as a
// deterministic zero-noise run plus the stochastic convolution of the
// increments with the cached volatility curves. Only short ends and bond
// integrals are formed.
void simulate_fast(const SimulationConfig& cfg, const ModelSpec& spec, PathEnsemble& ens) {
  const PathState init = initial_state(spec, cfg.grid);
  const Stepper stepper(spec, cfg.grid.dt, init.family, true);
  const std::size_t steps = cfg.grid.steps(), I = spec.m + 1, d = spec.d, M = cfg.maturities.size();
  const double dt = cfg.grid.dt;
  const auto& rs = ens.record_steps();
  const std::size_t R = rs.size();
  const bool jumps_active = !spec.jumps.empty() && !spec.gamma.is_none();

  // zero-noise run
  std::vector<double> det_short(I * (steps + 1));
  std::vector<double> det_int(R * I * M, kNaN);
  std::vector<std::size_t> J(R * M, 0);
  std::vector<char> alive(R * M, 0);
  {
    StepInputs zero{std::vector<double>(d, 0.0), {}};
    PathState s = init;
    std::size_t r = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
      for (std::size_t i = 0; i < I; ++i) det_short[i * (steps + 1) + k] = s.family[i].h0();
      if (r < R && rs[r] == k) {
        for (std::size_t j = 0; j < M; ++j) {
          const double tau = cfg.maturities[j] - dt * static_cast<double>(k);
          if (tau < -1e-9 * std::max(1.0, cfg.maturities[j])) continue;
          alive[r * M + j] = 1;
          J[r * M + j] = static_cast<std::size_t>(std::llround(std::max(0.0, tau) / dt));
          for (std::size_t i = 0; i < I; ++i) det_int[(r * I + i) * M + j] = integrate(s.family[i], std::max(0.0, tau));
        }
        ++r;
      }
      if (k < steps) s = stepper.step(s, zero);
    }
  }

  std::vector<Kernel> beta;  // [i*d + f]
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t f = 0; f < d; ++f) beta.emplace_back(stepper.full().beta[i][f].values());
  std::vector<std::vector<Kernel>> atom_kernels;  // [atom][i]
  if (jumps_active && spec.jumps.kind() == JumpMeasure::Kind::Atomic)
    for (const auto& q : spec.jumps.nodes()) {
      std::vector<Kernel> ks;
      for (std::size_t i = 0; i < I; ++i) ks.emplace_back(stepper.event_gamma(init.family, i, q.x).values());
      atom_kernels.push_back(std::move(ks));
    }

  run_parallel(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    const NoiseSource noise(cfg, spec, p);
    std::vector<double> dw(steps * d), rev(steps * d), w;
    for (std::size_t k = 0; k < steps; ++k) {
      noise.brownian(k, w);
      for (std::size_t f = 0; f < d; ++f) {
        dw[k * d + f] = w[f];
        rev[f * steps + (steps - 1 - k)] = w[f];
      }
    }
    // jump kernels per event
    const auto& events = noise.jump_events();
    std::vector<std::vector<Kernel>> own;
    std::vector<const std::vector<Kernel>*> ev_kernel;
    if (jumps_active) {
      own.reserve(events.size());
      for (const auto& e : events) {
        const std::vector<Kernel>* hit = nullptr;
        const auto nodes = spec.jumps.nodes();
        for (std::size_t a = 0; a < atom_kernels.size(); ++a)
          if (nodes[a].x == e.second) hit = &atom_kernels[a];
        if (!hit) {
          std::vector<Kernel> ks;
          for (std::size_t i = 0; i < I; ++i) ks.emplace_back(stepper.event_gamma(init.family, i, e.second).values());
          own.push_back(std::move(ks));
          hit = &own.back();
        }
        ev_kernel.push_back(hit);
      }
    }

    // short ends
    std::vector<double> shorts(I * (steps + 1));
    for (std::size_t i = 0; i < I; ++i)
      for (std::size_t n = 0; n <= steps; ++n) {
        double acc = det_short[i * (steps + 1) + n];
        for (std::size_t f = 0; f < d; ++f)
          acc += dot(beta[i * d + f].v.data() + 1, rev.data() + f * steps + (steps - n), n);
        for (std::size_t e = 0; e < ev_kernel.size(); ++e)
          if (events[e].first < n) acc += (*ev_kernel[e])[i].v[n - events[e].first];
        shorts[i * (steps + 1) + n] = acc;
      }

    std::vector<double> spots = init.spots, sh(I), bonds(I * M, kNaN);
    double numeraire = 1.0, deflator = 1.0;
    std::size_t r = 0, ev = 0;
    StepInputs in;
    for (std::size_t n = 0; n <= steps; ++n) {
      for (std::size_t i = 0; i < I; ++i) sh[i] = shorts[i * (steps + 1) + n];
      if (r < R && rs[r] == n) {
        std::fill(bonds.begin(), bonds.end(), kNaN);
        for (std::size_t j = 0; j < M; ++j) {
          if (!alive[r * M + j]) continue;
          const std::size_t Jn = J[r * M + j];
          for (std::size_t i = 0; i < I; ++i) {
            double acc = 0.0;
            for (std::size_t f = 0; f < d; ++f) {
              const Kernel& kb = beta[i * d + f];
              for (std::size_t k = 0; k < n; ++k) acc += dw[k * d + f] * kb.trap(n - k, Jn);
            }
            for (std::size_t e = 0; e < ev_kernel.size(); ++e)
              if (events[e].first < n) acc += (*ev_kernel[e])[i].trap(n - events[e].first, Jn);
            bonds[i * M + j] = std::exp(-(det_int[(r * I + i) * M + j] + dt * acc));
          }
        }
        ens.record_scalars(p, r, spots.data(), sh.data(), numeraire, deflator, bonds.data(), kNaN);
        ++r;
      }
      if (n == steps) break;
      in.dW.assign(dw.begin() + static_cast<std::ptrdiff_t>(n * d), dw.begin() + static_cast<std::ptrdiff_t>((n + 1) * d));
      in.jumps.clear();
      while (ev < events.size() && events[ev].first == n) in.jumps.push_back({events[ev++].second, 1});
      Stepper::advance_scalars(spec, dt * static_cast<double>(n), dt, sh.data(), in, spots.data(), numeraire, deflator);
    }
  });
}

}  // namespace

PathEnsemble simulate(const SimulationConfig& cfg, const ModelSpec& spec) {
  spec.check_complete();
  PathEnsemble ens = make_ensemble(cfg, spec);
  const bool fast = cfg.allow_fast_path && spec.state_independent() && cfg.store_curves_paths == 0 &&
                    !(cfg.track_cone && spec.m >= 2);
  ens.fast_path = fast;
  if (fast)
    simulate_fast(cfg, spec, ens);
  else
    simulate_stepping(cfg, spec, ens);
  return ens;
}

void simulate_paths(const SimulationConfig& cfg, const ModelSpec& spec, const StepObserver& observer) {
  cfg.grid.validate();
  const PathState init = initial_state(spec, cfg.grid);
  const Stepper stepper(spec, cfg.grid.dt, init.family, true);
  const std::size_t steps = cfg.grid.steps();
  run_parallel(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    const NoiseSource noise(cfg, spec, p);
    PathState s = init;
    for (std::size_t k = 0; k < steps; ++k) {
      const StepInputs in = noise.step(k);
      PathState next = stepper.step(s, in);
      observer(p, k, s, in, next);
      s = std::move(next);
    }
  });
}

}  // namespace hjm
