#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "hjm/affine.hpp"
#include "hjm/deflator.hpp"
#include "hjm/drift.hpp"
#include "hjm/invariance.hpp"
#include "hjm/scenario.hpp"

namespace hjm {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t k = 0; k < t.columns.size(); ++k) s += (k ? "," : "") + t.columns[k];
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) s += ',';
      if (const auto* i = std::get_if<std::int64_t>(&row[k])) s += std::to_string(*i);
      else if (const auto* d = std::get_if<double>(&row[k])) s += format_double(*d);
      else s += std::get<std::string>(row[k]);
    }
    s += '\n';
  }
  return s;
}

namespace {

Cell ix(std::size_t v) { return static_cast<std::int64_t>(v); }
Cell yn(bool v) { return std::string(v ? "true" : "false"); }

// NaN and infinities are not JSON numbers
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json check(const std::string& name, bool pass, double value, double threshold, const std::string& note = "") {
  json j{{"name", name}, {"pass", pass}, {"value", num(value)}, {"threshold", num(threshold)}};
  if (!note.empty()) j["note"] = note;
  return j;
}

json check_result(const CheckResult& c) {
  json j{{"name", c.name}, {"pass", c.pass}, {"worst", num(c.worst)}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

json curve_json(const Curve& c, std::size_t stride) {
  json xi = json::array(), v = json::array();
  const auto vals = c.values();
  for (std::size_t k = 0; k < vals.size(); k += stride) {
    xi.push_back(c.grid_step() * static_cast<double>(k));
    v.push_back(num(vals[k]));
  }
  return {{"xi", xi}, {"value", v}};
}

json family_json(const CurveFamily& f, std::size_t stride) {
  json a = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) a.push_back(curve_json(f[i], stride));
  return a;
}

std::vector<std::size_t> all_indices(const ModelSpec& s) {
  std::vector<std::size_t> v(s.m + 1);
  for (std::size_t i = 0; i <= s.m; ++i) v[i] = i;
  return v;
}

std::size_t stride_for(std::size_t intervals, std::size_t target) {
  return std::max<std::size_t>(1, intervals / target);
}

CommandResult cmd_simulate(const ScenarioConfig& cfg) {
  const ModelSpec& spec = cfg.require_model("simulate");
  SimulationConfig sc = cfg.simulation();
  sc.track_cone = false;
  const PathEnsemble ens = simulate(sc, spec);
  const std::size_t I = ens.indices(), R = ens.records(), P = std::min(cfg.simulate.scalar_paths, ens.paths());

  CommandResult res;
  Table paths{"paths", {"path", "t", "index", "spot", "short_end", "numeraire", "deflator"}, {}};
  Table bonds{"bonds", {"path", "t", "index", "maturity", "price"}, {}};
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t i = 0; i < I; ++i) {
        paths.rows.push_back({ix(p), ens.times()[r], ix(i), ens.spot(p, r, i), ens.short_end(p, r, i),
                              ens.numeraire(p, r), ens.deflator(p, r)});
        for (std::size_t j = 0; j < ens.maturities().size(); ++j) {
          const double b = ens.bond_price(p, r, i, j);
          if (!std::isnan(b)) bonds.rows.push_back({ix(p), ens.times()[r], ix(i), ens.maturities()[j], b});
        }
      }

  Table summary{"summary", {"t", "index", "mean_spot", "mean_short_end", "sd_short_end"}, {}};
  bool finite = true;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < I; ++i) {
      double s = 0.0, e = 0.0, q = 0.0;
      for (std::size_t p = 0; p < ens.paths(); ++p) {
        s += ens.spot(p, r, i);
        e += ens.short_end(p, r, i);
        q += ens.short_end(p, r, i) * ens.short_end(p, r, i);
        finite = finite && std::isfinite(ens.spot(p, r, i)) && std::isfinite(ens.short_end(p, r, i));
      }
      const double n = static_cast<double>(ens.paths());
      const double me = e / n;
      const double sd = ens.paths() > 1 ? std::sqrt(std::max(0.0, (q - n * me * me) / (n - 1.0))) : 0.0;
      summary.rows.push_back({ens.times()[r], ix(i), s / n, me, sd});
    }
  }

  // full curves only for the exported paths; noise is keyed by path so they are the ensemble's paths
  Table curves{"curves", {"path", "t", "index", "xi", "value"}, {}};
  SimulationConfig cc = sc;
  cc.n_paths = std::min(cfg.simulate.curve_paths, cfg.n_paths);
  const auto rec = record_schedule(sc);
  const std::set<std::size_t> rec_steps(rec.begin(), rec.end());
  std::vector<std::vector<std::vector<Cell>>> per(cc.n_paths);
  std::vector<double> cone(cc.n_paths, -INFINITY);
  const std::size_t stride = cfg.simulate.xi_stride;
  auto dump = [&](std::size_t p, std::size_t step, const PathState& s) {
    const double t = sc.grid.dt * static_cast<double>(step);
    for (std::size_t i = 0; i < s.family.size(); ++i) {
      const auto v = s.family[i].values();
      for (std::size_t k = 0; k < v.size(); k += stride)
        per[p].push_back({ix(p), t, ix(i), s.family[i].grid_step() * static_cast<double>(k), v[k]});
    }
    if (s.family.m() >= 2) cone[p] = std::max(cone[p], cone_gap(s.family));
  };
  if (cc.n_paths > 0) {
    simulate_paths(cc, spec, [&](std::size_t p, std::size_t k, const PathState& before, const StepInputs&,
                                 const PathState& after) {
      if (k == 0 && rec_steps.count(0)) dump(p, 0, before);
      if (rec_steps.count(k + 1)) dump(p, k + 1, after);
    });
  }
  double worst_cone = -INFINITY;
  for (std::size_t p = 0; p < cc.n_paths; ++p) {
    for (auto& row : per[p]) curves.rows.push_back(std::move(row));
    worst_cone = std::max(worst_cone, cone[p]);
  }

  res.pass = finite;
  res.report["checks"] = json::array({check("finite_state", finite, finite ? 0.0 : 1.0, 0.0)});
  res.report["paths"] = ens.paths();
  res.report["records"] = R;
  res.report["fast_path"] = ens.fast_path;
  res.report["max_cone_gap_exported"] = std::isfinite(worst_cone) ? json(worst_cone) : json(nullptr);
  res.tables = {std::move(paths), std::move(bonds), std::move(summary), std::move(curves)};
  return res;
}

CommandResult cmd_verify_drift(const ScenarioConfig& cfg) {
  const ModelSpec& spec = cfg.require_model("verify-drift");
  const VerifyDriftOptions& o = cfg.verify_drift;
  const CurveFamily fam = spec.initial_family(cfg.grid.dt, cfg.grid.xi_intervals());
  CommandResult res;
  Table t{"residuals", {"t", "T", "index", "residual", "integrability", "active_marks"}, {}};
  double worst = 0.0;
  bool integrable = true;
  json worst_at;
  for (std::size_t a = 0; a < o.t_points; ++a)
    for (std::size_t b = 0; b < o.T_points; ++b) {
      const double tt = o.t_step * static_cast<double>(a), T = o.T_min + o.T_step * static_cast<double>(b);
      if (T <= tt) continue;
      if (T - tt > fam.horizon() + 1e-12) throw GridError("verify-drift maturity beyond horizon_xi");
      const DriftInputs in = drift_inputs(fam, tt, spec);
      const auto r = integrated_drift_residual(in, T);
      const auto ji = jump_integrability_check(in, T);
      for (std::size_t i = 0; i < r.size(); ++i) {
        t.rows.push_back({tt, T, ix(i), r[i], ji[i].value, ix(ji[i].active)});
        integrable = integrable && ji[i].pass;
        if (std::abs(r[i]) > worst) {
          worst = std::abs(r[i]);
          worst_at = {{"t", tt}, {"T", T}, {"index", i}};
        }
      }
    }
  json checks = json::array();
  checks.push_back(check("integrated_drift_residual", worst < o.tolerance, worst, o.tolerance));
  checks.push_back(check("jump_integrability", integrable, 0.0, 0.0));
  res.pass = worst < o.tolerance && integrable;
  if (o.validate) {
    const ValidationReport v = validate_spec(spec, cfg.space, cfg.validation);
    json vj = json::array();
    for (const auto& c : v.checks) vj.push_back(check_result(c));
    res.report["validation"] = vj;
    checks.push_back(check("validate_spec", v.all_pass(), 0.0, 0.0));
    res.pass = res.pass && v.all_pass();
  }
  const OrderReport ord = check_order_condition(spec, cfg.validation);
  json oj{{"pass", ord.pass}};
  if (ord.i) oj["first_violation"] = {{"i", *ord.i}, {"j", *ord.j}, {"t", *ord.t}};
  res.report["order_condition"] = oj;  // informational: only monotonicity needs it
  res.report["checks"] = checks;
  res.report["max_residual"] = worst;
  if (!worst_at.is_null()) res.report["worst"] = worst_at;
  res.tables = {std::move(t)};
  return res;
}

CommandResult cmd_martingale(const ScenarioConfig& cfg) {
  const ModelSpec& spec = cfg.require_model("martingale-test");
  const MartingaleOptions& o = cfg.martingale;
  std::vector<double> mats = o.maturities.empty() ? cfg.maturities : o.maturities;
  if (mats.empty()) throw DomainError("martingale-test needs maturities");
  SimulationConfig sc = cfg.simulation();
  std::set<double> all(sc.maturities.begin(), sc.maturities.end());
  all.insert(mats.begin(), mats.end());
  sc.maturities.assign(all.begin(), all.end());
  const PathEnsemble ens = simulate(sc, spec);
  const DeflatedSeries s = deflated_series(ens, mats, all_indices(spec));
  const std::vector<double> times = o.times.empty() ? std::vector<double>{ens.times().back()} : o.times;

  CommandResult res;
  Table t{"zscores", {"t", "index", "maturity", "mean", "value0", "se", "z", "pass"}, {}};
  json failures = json::array();
  double worst = 0.0;
  for (double tt : times)
    for (const ZScore& z : martingale_zscore(s, tt)) {
      const bool ok = std::abs(z.z) <= o.threshold;
      worst = std::max(worst, std::abs(z.z));
      t.rows.push_back({z.t, ix(z.index), z.maturity, z.mean, z.value0, z.se, z.z, yn(ok)});
      if (!ok) failures.push_back({{"index", z.index}, {"maturity", z.maturity}, {"t", z.t}, {"z", num(z.z)}});
    }
  res.pass = failures.empty();
  res.report["checks"] = json::array({check("deflated_prices_martingale", res.pass, worst, o.threshold)});
  res.report["max_abs_z"] = worst;
  res.report["failures"] = failures;
  res.report["paths"] = ens.paths();
  res.tables = {std::move(t)};
  return res;
}

CommandResult cmd_monotonicity(const ScenarioConfig& cfg) {
  const ModelSpec& spec = cfg.require_model("check-monotonicity");
  const MonotonicityOptions& o = cfg.monotonicity;
  ConeCheckGrid cg;
  cg.step = cfg.validation.step;
  cg.intervals = std::min<std::size_t>(cfg.validation.intervals, 400);
  cg.horizon_t = cfg.grid.horizon_t;
  const ConeCoeffReport coeff = check_cone_coeff_conditions(spec, o.coeff_samples, cfg.seed, cg);

  SimulationConfig sc = cfg.simulation();
  sc.record_every = o.record_every;
  sc.track_cone = true;
  const PathEnsemble ens = simulate(sc, spec);
  const MonotonicityReport mono = monotonicity_report(ens, spec, o.tol);

  CommandResult res;
  Table t{"checks", {"name", "pass", "worst"}, {}};
  json coeffs = json::array(), pre = json::array();
  for (const auto& c : coeff.checks) {
    coeffs.push_back(check_result(c));
    t.rows.push_back({c.name, yn(c.pass), c.worst});
  }
  bool pre_ok = true;
  for (const auto& c : mono.preconditions) {
    pre.push_back(check_result(c));
    t.rows.push_back({c.name, yn(c.pass), c.worst});
    pre_ok = pre_ok && c.pass;
  }
  t.rows.push_back({std::string("price_ordering"), yn(mono.price_violations == 0), ix(mono.price_violations)});
  t.rows.push_back({std::string("cone_membership"), yn(mono.cone_violations == 0), mono.worst_cone_gap});

  res.pass = coeff.pass && pre_ok && mono.pass;
  res.report["checks"] = json::array({check("cone_coefficients", coeff.pass, 0.0, 0.0),
                                      check("preconditions", pre_ok, 0.0, 0.0),
                                      check("price_ordering", mono.price_violations == 0,
                                            static_cast<double>(mono.price_violations), 0.0),
                                      check("cone_membership", mono.cone_violations == 0, mono.worst_cone_gap, 0.0)});
  res.report["coefficient_checks"] = coeffs;
  res.report["preconditions"] = pre;
  res.report["touchings_sampled"] = coeff.touchings;
  res.report["comparisons"] = mono.comparisons;
  res.report["implication_failures"] = mono.implication_failures;
  if (coeff.counterexample) {
    const auto& ce = *coeff.counterexample;
    json j{{"condition", ce.condition}, {"i", ce.i}, {"j", ce.j}, {"factor", ce.factor}, {"xi_star", ce.xi_star},
           {"chi", ce.chi}, {"mark", ce.mark}, {"t", ce.t}, {"lhs", num(ce.lhs)}, {"rhs", num(ce.rhs)}};
    if (ce.family) j["family"] = family_json(*ce.family, 1);
    res.report["counterexample"] = j;
  }
  if (mono.worst) {
    const auto& w = *mono.worst;
    json j{{"path", w.path}, {"t", w.t}, {"i", w.i}, {"j", w.j}, {"maturity", w.maturity}, {"gap", w.gap}};
    if (const auto r = ens.record_at(w.t); r && ens.family(w.path, *r))
      j["family"] = family_json(*ens.family(w.path, *r), 1);
    res.report["worst_price_violation"] = j;
  }
  res.tables = {std::move(t)};
  return res;
}

CommandResult cmd_affine(const ScenarioConfig& cfg) {
  const ModelSpec& spec = cfg.require_model("realize-affine");
  const AffineOptions& o = cfg.affine;
  const std::size_t n = o.paths ? o.paths : cfg.n_paths;
  std::vector<double> dts = o.dts.empty() ? std::vector<double>{cfg.grid.dt} : o.dts;
  std::sort(dts.begin(), dts.end(), std::greater<>());
  CommandResult res;
  Table t{"gaps", {"dt", "max_gap", "worst_path", "worst_t", "worst_xi", "short_end_pin"}, {}};
  std::vector<double> lx, ly;
  RealizationGap finest;
  for (double dt : dts) {
    SimulationConfig sc = cfg.simulation();
    sc.grid.dt = dt;
    sc.n_paths = n;
    sc.grid.noise_dt = cfg.grid.noise_dt > 0.0 ? cfg.grid.noise_dt : dts.back();
    sc.grid.validate();
    const AffineSpec a = affine_from_model(spec, dt, sc.grid.xi_intervals(), o.rho);
    const RealizationGap g = realization_gap(sc, a);
    t.rows.push_back({dt, g.max_gap, ix(g.worst_path), g.worst_t, g.worst_xi, g.max_short_end_pin});
    lx.push_back(std::log(dt));
    ly.push_back(std::log(g.max_gap));
    finest = g;
  }
  json checks = json::array({check("realization_gap", finest.max_gap <= o.tolerance, finest.max_gap, o.tolerance)});
  res.pass = finest.max_gap <= o.tolerance;
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0, sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) mx += lx[k] / n, my += ly[k] / n;
    for (std::size_t k = 0; k < lx.size(); ++k) sxy += (lx[k] - mx) * (ly[k] - my), sxx += (lx[k] - mx) * (lx[k] - mx);
    const double slope = sxy / sxx;
    const bool ok = std::isfinite(slope) && std::abs(slope - 1.0) <= 0.2;
    checks.push_back(check("convergence_slope", ok, slope, 1.0, "window 0.8 to 1.2"));
    res.report["slope"] = num(slope);
    res.pass = res.pass && ok;
  }
  res.report["checks"] = checks;
  res.report["max_gap"] = finest.max_gap;
  res.report["worst"] = {{"path", finest.worst_path}, {"t", finest.worst_t}, {"xi", finest.worst_xi}};
  res.tables = {std::move(t)};
  return res;
}

json ratio_json(const RatioEstimate& e) {
  return {{"t", e.t},
          {"T", e.T},
          {"mean", e.mean},
          {"se", e.se},
          {"oracle", e.oracle},
          {"oracle_complement", e.oracle_complement},
          {"z", e.z},
          {"within_3se", e.within_3se},
          {"mc_below_one", e.mc_below_one},
          {"closed_form_below_one", e.closed_form_below_one},
          {"truncation_rate", e.truncation_rate}};
}

CommandResult cmd_mmm(const ScenarioConfig& cfg) {
  const MmmOptions& o = cfg.mmm;
  const MmmParams& p = o.params;
  const std::size_t n = o.paths ? o.paths : cfg.n_paths;
  CommandResult res;
  json checks = json::array();
  bool pass = true;
  auto add = [&](json c) {
    pass = pass && c["pass"].get<bool>();
    checks.push_back(std::move(c));
  };

  Table ratio{"ratio", {"t", "T", "mean", "se", "oracle", "oracle_complement", "z", "within_3se", "mc_below_one",
                        "closed_form_below_one", "truncation_rate"}, {}};
  json ratios = json::array();
  auto estimate = [&](double t, double T, double dt, bool require_mc_strict) {
    const RatioEstimate e = expected_ratio(p, t, T, n, dt, cfg.seed, cfg.threads);
    ratio.rows.push_back({e.t, e.T, e.mean, e.se, e.oracle, e.oracle_complement, e.z, yn(e.within_3se),
                          yn(e.mc_below_one), yn(e.closed_form_below_one), e.truncation_rate});
    ratios.push_back(ratio_json(e));
    const std::string tag = "(" + format_double(t) + "," + format_double(T) + ")";
    add(check("ratio_matches_mprc" + tag, e.within_3se, e.z, 3.0));
    add(check("ratio_below_one_closed_form" + tag, e.closed_form_below_one, e.oracle_complement, 0.0));
    if (require_mc_strict) add(check("ratio_below_one_mc" + tag, e.mc_below_one, e.mean + 3.0 * e.se, 1.0));
    add(check("truncation_rate" + tag, e.truncation_rate < 1e-3, e.truncation_rate, 1e-3));
  };
  estimate(o.t, o.T, o.dt, false);
  for (const auto& [t, T] : o.supplementary) estimate(t, T, o.supplementary_dt, true);

  // exp(-int f^0) against the closed-form bond, and the forward curves themselves
  Table curves{"curves", {"index", "xi", "value"}, {}};
  double integral_gap = 0.0;
  for (std::size_t i = 0; i < p.indices(); ++i) {
    const Curve c = forward_curve_mmm(p, i, 0.0, p.x0, o.curve_step, o.curve_intervals);
    const auto v = c.values();
    for (std::size_t k = 0; k < v.size(); k += stride_for(o.curve_intervals, 200))
      curves.rows.push_back({ix(i), c.grid_step() * static_cast<double>(k), v[k]});
    for (std::size_t k = 1; k <= o.curve_intervals; ++k) {
      const double tau = o.curve_step * static_cast<double>(k);
      const double direct = bond_price(c, tau), closed = bond_mmm(p, i, 0.0, tau, p.x0);
      integral_gap = std::max(integral_gap, std::abs(direct - closed));
    }
  }
  add(check("bond_from_forward_integral", integral_gap < o.integral_tol, integral_gap, o.integral_tol));

  // 1/xbar as deflator for the MMM prices
  const double horizon = *std::max_element(o.maturities.begin(), o.maturities.end());
  const std::size_t every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 / o.deflator_dt)));
  const GopPaths g = simulate_gop(p, o.deflator_dt, horizon, n, cfg.seed ^ 0x5eedull, cfg.threads, every);
  const PathEnsemble ens = mmm_ensemble(p, g, o.maturities);
  std::vector<std::size_t> idx(p.indices());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const DeflatedSeries ds = deflated_series(ens, o.maturities, idx);
  Table zt{"deflator_zscores", {"t", "index", "maturity", "mean", "value0", "se", "z", "pass"}, {}};
  json failures = json::array();
  double worst_z = 0.0;
  for (double T : o.maturities)
    for (const ZScore& z : martingale_zscore(ds, T)) {
      zt.rows.push_back({z.t, ix(z.index), z.maturity, z.mean, z.value0, z.se, z.z, yn(z.pass)});
      worst_z = std::max(worst_z, std::abs(z.z));
      if (!z.pass) failures.push_back({{"index", z.index}, {"maturity", z.maturity}, {"t", z.t}, {"z", num(z.z)}});
    }
  add(check("inverse_gop_deflates", failures.empty(), worst_z, 3.0));
  const MonotonicityReport mono = monotonicity_report(ens, mmm_model_spec(p), cfg.monotonicity.tol);
  add(check("monotone_prices", mono.price_violations == 0, static_cast<double>(mono.price_violations), 0.0));

  res.pass = pass;
  res.report["checks"] = checks;
  res.report["ratios"] = ratios;
  res.report["bond_integral_gap"] = integral_gap;
  res.report["deflator_failures"] = failures;
  res.report["paths"] = n;
  res.tables = {std::move(ratio), std::move(curves), std::move(zt)};
  return res;
}

void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  out << s;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

CommandResult run_command(const ScenarioConfig& cfg, const std::string& command) {
  CommandResult res;
  if (command == "simulate") res = cmd_simulate(cfg);
  else if (command == "verify-drift") res = cmd_verify_drift(cfg);
  else if (command == "martingale-test") res = cmd_martingale(cfg);
  else if (command == "check-monotonicity") res = cmd_monotonicity(cfg);
  else if (command == "realize-affine") res = cmd_affine(cfg);
  else if (command == "mmm") res = cmd_mmm(cfg);
  else throw DomainError("unknown command " + command);
  res.command = command;
  json head{{"schema", kReportSchema}, {"command", command}, {"status", res.pass ? "pass" : "fail"}};
  head.update(res.report);
  res.report = std::move(head);
  return res;
}

std::vector<std::string> write_report(const std::string& dir, const std::vector<CommandResult>& results,
                                      const ScenarioConfig& cfg, json* manifest_out) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> files;
  json cmds = json::array(), failures = json::array();
  std::map<std::string, int> seen;
  bool all = true;
  for (const auto& r : results) {
    const int k = ++seen[r.command];
    const std::string stem = k == 1 ? r.command : r.command + "-" + std::to_string(k);
    json f = json::array();
    write_file(fs::path(dir) / (stem + ".json"), r.report.dump(2) + "\n");
    f.push_back(stem + ".json");
    for (const auto& t : r.tables) {
      const std::string name = stem + "_" + t.name + ".csv";
      write_file(fs::path(dir) / name, to_csv(t));
      f.push_back(name);
    }
    for (const auto& x : f) files.push_back(x.get<std::string>());
    const std::string status = r.report.value("status", r.pass ? "pass" : "fail");
    cmds.push_back({{"command", stem}, {"status", status}, {"files", f}});
    if (status != "pass") {
      all = false;
      json fj{{"command", stem}, {"status", status}};
      if (r.report.contains("error")) fj["error"] = r.report["error"];
      if (r.report.contains("checks"))
        for (const auto& c : r.report["checks"])
          if (!c["pass"].get<bool>()) fj["failed_checks"].push_back(c["name"]);
      failures.push_back(fj);
    }
  }
  json m{{"schema", kManifestSchema},
         {"version", kVersion},
         {"config_hash", "fnv1a64:" + hex(fnv1a(cfg.canonical))},
         {"seed", cfg.seed},
         {"n_paths", cfg.n_paths},
         {"grid",
          {{"dt", cfg.grid.dt}, {"horizon_t", cfg.grid.horizon_t}, {"horizon_xi", cfg.grid.horizon_xi},
           {"noise_dt", cfg.grid.noise_dt}}},
         {"status", all ? "pass" : "fail"},
         {"commands", cmds},
         {"failures", failures}};
  write_file(fs::path(dir) / "manifest.json", m.dump(2) + "\n");
  files.push_back("manifest.json");
  if (manifest_out) *manifest_out = m;
  return files;
}

RunSummary run(const ScenarioConfig& cfg, const std::vector<std::string>& commands) {
  RunSummary s;
  for (const auto& c : commands) {
    try {
      s.results.push_back(run_command(cfg, c));
    } catch (const std::exception& e) {
      CommandResult r;
      r.command = c;
      r.pass = false;
      r.report = {{"schema", kReportSchema}, {"command", c}, {"status", "error"}, {"error", e.what()}};
      s.results.push_back(std::move(r));
    }
  }
  write_report(cfg.output_dir, s.results, cfg, &s.manifest);
  s.exit_code = s.manifest["status"] == "pass" ? 0 : 1;
  return s;
}

}  // namespace hjm
