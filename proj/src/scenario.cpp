#include "hjm/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hjm {

std::string ConfigIssue::str() const {
  std::string s = line > 0 ? "line " + std::to_string(line) + ": " : "";
  if (!key.empty()) s += key + ": ";
  return s + reason;
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string s = "invalid scenario config";
  for (const auto& i : issues) s += "\n  " + i.str();
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues) : Error(join_issues(issues)), issues_(std::move(issues)) {}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

struct Ctx {
  std::vector<ConfigIssue> issues;
  void add(const YAML::Node& n, const std::string& key, const std::string& reason) {
    issues.push_back({n ? line_of(n) : 0, key, reason});
  }
};

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, double>) return "a number";
  else if constexpr (std::is_same_v<T, bool>) return "true or false";
  else if constexpr (std::is_same_v<T, std::string>) return "a string";
  else return "a nonnegative integer";
}

template <class T>
bool scalar(const YAML::Node& n, const std::string& key, Ctx& c, T& out) {
  if (!n.IsScalar()) {
    c.add(n, key, std::string("expected ") + type_name<T>());
    return false;
  }
  try {
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!n.Scalar().empty() && n.Scalar()[0] == '-') throw YAML::BadConversion(n.Mark());
      out = static_cast<T>(n.as<unsigned long long>());
    } else if constexpr (std::is_same_v<T, double>) {
      out = n.as<double>();
      if (!std::isfinite(out)) throw YAML::BadConversion(n.Mark());
    } else {
      out = n.as<T>();
    }
  } catch (const YAML::BadConversion&) {
    c.add(n, key, std::string("expected ") + type_name<T>());
    return false;
  }
  return true;
}

bool numbers(const YAML::Node& n, const std::string& key, Ctx& c, std::vector<double>& out) {
  if (!n.IsSequence()) {
    c.add(n, key, "expected a list of numbers");
    return false;
  }
  std::vector<double> v;
  bool ok = true;
  for (std::size_t k = 0; k < n.size(); ++k) {
    double x = 0.0;
    ok = scalar(n[k], key + "[" + std::to_string(k) + "]", c, x) && ok;
    v.push_back(x);
  }
  if (ok) out = std::move(v);
  return ok;
}

// Mapping whose keys must all be consumed; leftovers are reported as unknown.
class Map {
 public:
  Map(const YAML::Node& n, std::string path, Ctx& c) : n_(n), path_(std::move(path)), c_(c) {
    if (n_ && !n_.IsMap() && !n_.IsNull()) {
      c_.add(n_, path_, "expected a mapping");
      bad_ = true;
    }
  }
  Map(const Map&) = delete;
  ~Map() {
    if (bad_ || !n_ || !n_.IsMap()) return;
    for (const auto& kv : n_) {
      const std::string k = kv.first.as<std::string>();
      if (!seen_.count(k)) c_.add(kv.first, key(k), "unknown key");
    }
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  YAML::Node get(const std::string& k) {
    seen_.insert(k);
    if (bad_ || !n_ || !n_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& cn = n_;
    return cn[k];
  }
  template <class T>
  bool read(const std::string& k, T& out) {
    const YAML::Node v = get(k);
    if (!v) return false;
    return scalar(v, key(k), c_, out);
  }
  bool read_list(const std::string& k, std::vector<double>& out) {
    const YAML::Node v = get(k);
    if (!v) return false;
    return numbers(v, key(k), c_, out);
  }
  Ctx& ctx() { return c_; }
  const YAML::Node& node() const { return n_; }

 private:
  YAML::Node n_;
  std::string path_;
  Ctx& c_;
  std::set<std::string> seen_;
  bool bad_ = false;
};

// single-key mapping {name: value}; returns the name
std::string tagged(const YAML::Node& n, const std::string& key, Ctx& c, YAML::Node& value) {
  if (!n.IsMap() || n.size() != 1) {
    c.add(n, key, "expected a number or a single-key mapping");
    return {};
  }
  auto it = n.begin();
  value = it->second;
  return it->first.as<std::string>();
}

TimeFunction read_time_fn(const YAML::Node& n, const std::string& key, Ctx& c) {
  if (n.IsScalar()) {
    double v = 0.0;
    scalar(n, key, c, v);
    return TimeFunction::constant(v);
  }
  YAML::Node v;
  const std::string kind = tagged(n, key, c, v);
  if (kind.empty()) return {};
  if (kind == "constant") {
    double x = 0.0;
    scalar(v, key + ".constant", c, x);
    return TimeFunction::constant(x);
  }
  if (kind == "exponential") {
    std::vector<double> p;
    if (numbers(v, key + ".exponential", c, p)) {
      if (p.size() == 2) return TimeFunction::exponential(p[0], p[1]);
      c.add(v, key + ".exponential", "expected [scale, rate]");
    }
    return {};
  }
  if (kind == "piecewise") {
    Map m(v, key + ".piecewise", c);
    std::vector<double> breaks, values;
    m.read_list("breaks", breaks);
    m.read_list("values", values);
    try {
      return TimeFunction::piecewise(breaks, values);
    } catch (const Error& e) {
      c.add(v, key + ".piecewise", e.what());
    }
    return {};
  }
  c.add(n, key, "unknown time function '" + kind + "' (constant, exponential, piecewise)");
  return {};
}

MarkFunction read_mark_fn(const YAML::Node& n, const std::string& key, Ctx& c) {
  if (n.IsScalar()) {
    double v = 0.0;
    scalar(n, key, c, v);
    return MarkFunction::constant(v);
  }
  YAML::Node v;
  const std::string kind = tagged(n, key, c, v);
  if (kind.empty()) return {};
  if (kind == "constant") {
    double x = 0.0;
    scalar(v, key + ".constant", c, x);
    return MarkFunction::constant(x);
  }
  if (kind == "affine") {
    std::vector<double> p;
    if (numbers(v, key + ".affine", c, p)) {
      if (p.size() == 2) return MarkFunction::affine(p[0], p[1]);
      c.add(v, key + ".affine", "expected [intercept, slope]");
    }
    return {};
  }
  if (kind == "table") {
    Map m(v, key + ".table", c);
    std::vector<double> xs, values;
    m.read_list("x", xs);
    m.read_list("values", values);
    try {
      return MarkFunction::table(xs, values);
    } catch (const Error& e) {
      c.add(v, key + ".table", e.what());
    }
    return {};
  }
  c.add(n, key, "unknown mark function '" + kind + "' (constant, affine, table)");
  return {};
}

InitialCurve read_curve(const YAML::Node& n, const std::string& key, Ctx& c) {
  if (n.IsScalar()) {
    double v = 0.0;
    scalar(n, key, c, v);
    return InitialCurve::flat(v);
  }
  YAML::Node v;
  const std::string kind = tagged(n, key, c, v);
  if (kind.empty()) return InitialCurve::flat(0.0);
  if (kind == "flat") {
    double x = 0.0;
    scalar(v, key + ".flat", c, x);
    return InitialCurve::flat(x);
  }
  const std::map<std::string, std::size_t> arity{{"linear", 2}, {"exponential", 3}, {"nelson_siegel", 4}};
  const auto it = arity.find(kind);
  if (it == arity.end()) {
    c.add(n, key, "unknown curve '" + kind + "' (flat, linear, exponential, nelson_siegel)");
    return InitialCurve::flat(0.0);
  }
  std::vector<double> p;
  if (!numbers(v, key + "." + kind, c, p)) return InitialCurve::flat(0.0);
  if (p.size() != it->second) {
    c.add(v, key + "." + kind, "expected " + std::to_string(it->second) + " parameters");
    return InitialCurve::flat(0.0);
  }
  try {
    if (kind == "linear") return InitialCurve::linear(p[0], p[1]);
    if (kind == "exponential") return InitialCurve::exponential(p[0], p[1], p[2]);
    return InitialCurve::nelson_siegel(p[0], p[1], p[2], p[3]);
  } catch (const Error& e) {
    c.add(v, key + "." + kind, e.what());
  }
  return InitialCurve::flat(0.0);
}

const char* kIntensityInvariant = "JumpMeasureSpec invariant violated: intensity must be nonnegative";

JumpMeasure read_jumps(const YAML::Node& n, const std::string& key, Ctx& c) {
  YAML::Node v;
  const std::string kind = tagged(n, key, c, v);
  if (kind.empty()) return JumpMeasure::none();
  if (kind == "none") return JumpMeasure::none();
  if (kind == "atomic") {
    if (!v.IsSequence()) {
      c.add(v, key + ".atomic", "expected a list of [mark, weight] pairs");
      return JumpMeasure::none();
    }
    std::vector<QuadratureNode> atoms;
    bool ok = true;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string kk = key + ".atomic[" + std::to_string(k) + "]";
      std::vector<double> p;
      if (!numbers(v[k], kk, c, p) || p.size() != 2) {
        if (p.size() != 2) c.add(v[k], kk, "expected [mark, weight]");
        ok = false;
        continue;
      }
      if (p[1] < 0.0) {
        c.add(v[k], kk, kIntensityInvariant);
        ok = false;
      }
      atoms.push_back({p[0], p[1]});
    }
    if (!ok) return JumpMeasure::none();
    try {
      return JumpMeasure::atomic(atoms);
    } catch (const Error& e) {
      c.add(v, key + ".atomic", e.what());
    }
    return JumpMeasure::none();
  }
  if (kind == "truncated_exponential") {
    Map m(v, key + ".truncated_exponential", c);
    double intensity = 0.0, rate = 1.0, x_max = 1.0;
    std::size_t nodes = 64;
    const bool has = m.read("intensity", intensity);
    m.read("rate", rate);
    m.read("x_max", x_max);
    m.read("nodes", nodes);
    if (has && intensity < 0.0) {
      c.add(m.get("intensity"), m.key("intensity"), kIntensityInvariant);
      return JumpMeasure::none();
    }
    try {
      return JumpMeasure::truncated_exponential(intensity, rate, x_max, nodes);
    } catch (const Error& e) {
      c.add(v, key + ".truncated_exponential", e.what());
    }
    return JumpMeasure::none();
  }
  c.add(n, key, "unknown jump measure '" + kind + "' (none, atomic, truncated_exponential)");
  return JumpMeasure::none();
}

// list with one entry per index 0..m, or a single entry used for all
template <class F>
void per_index(const YAML::Node& n, const std::string& key, Ctx& c, std::size_t count, F&& f) {
  if (!n.IsSequence()) {
    f(0, n, key, true);
    return;
  }
  if (n.size() != count && n.size() != 1) {
    c.add(n, key, "expected " + std::to_string(count) + " entries (one per index 0..m)");
    return;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t src = n.size() == 1 ? 0 : k;
    f(k, n[src], key + "[" + std::to_string(src) + "]", n.size() == 1);
  }
}

ModelSpec read_model(const YAML::Node& node, const std::string& path, Ctx& c) {
  Map m(node, path, c);
  std::size_t mm = 1, d = 1;
  m.read("m", mm);
  m.read("d", d);
  if (d == 0) c.add(m.get("d"), m.key("d"), "at least one Brownian factor is required");
  d = std::max<std::size_t>(d, 1);
  const std::size_t n = mm + 1;
  ModelSpec s = zero_spec(mm, d, 0.03);

  std::string measure = "real-world", drift = "consistent";
  if (m.read("measure", measure)) {
    if (measure == "real-world") s.measure = Measure::RealWorld;
    else if (measure == "risk-neutral") s.measure = Measure::RiskNeutral;
    else c.add(m.get("measure"), m.key("measure"), "expected real-world or risk-neutral");
  }
  if (m.read("spot_drift", drift)) {
    if (drift == "consistent") s.spot_drift = SpotDrift::Consistent;
    else if (drift == "specified") s.spot_drift = SpotDrift::Specified;
    else c.add(m.get("spot_drift"), m.key("spot_drift"), "expected consistent or specified");
  }
  m.read("drift_bump", s.drift_bump);
  if (auto v = m.get("short_rate")) s.short_rate = read_time_fn(v, m.key("short_rate"), c);

  if (auto v = m.get("initial_curves")) {
    per_index(v, m.key("initial_curves"), c, n, [&](std::size_t i, const YAML::Node& e, const std::string& k, bool all) {
      const InitialCurve ic = read_curve(e, k, c);
      if (all) s.initial_curves.assign(n, ic);
      else s.initial_curves[i] = ic;
    });
  }
  if (auto v = m.get("initial_spots")) {
    std::vector<double> sp;
    if (numbers(v, m.key("initial_spots"), c, sp)) {
      if (sp.size() != n) c.add(v, m.key("initial_spots"), "expected " + std::to_string(n) + " entries");
      else s.initial_spots = sp;
    }
  }

  if (auto v = m.get("volatility")) {
    Map vm(v, m.key("volatility"), c);
    std::string kind = "vasicek_exp";
    if (vm.read("kind", kind) && kind != "vasicek_exp")
      c.add(vm.get("kind"), vm.key("kind"), "only vasicek_exp volatility is configurable");
    std::vector<std::vector<double>> scale(n, std::vector<double>(d, 0.0));
    std::vector<double> decay(n, -1.0);
    if (auto sv = vm.get("scale")) {
      if (!sv.IsSequence() || sv.size() != n) {
        c.add(sv, vm.key("scale"), "expected " + std::to_string(n) + " rows of " + std::to_string(d) + " loadings");
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<double> row;
          const std::string k = vm.key("scale") + "[" + std::to_string(i) + "]";
          if (sv[i].IsScalar() && d == 1) scalar(sv[i], k, c, scale[i][0]);
          else if (numbers(sv[i], k, c, row)) {
            if (row.size() != d) c.add(sv[i], k, "expected " + std::to_string(d) + " loadings");
            else scale[i] = row;
          }
        }
      }
    }
    if (auto dv = vm.get("decay")) {
      if (dv.IsScalar()) {
        double x = -1.0;
        scalar(dv, vm.key("decay"), c, x);
        decay.assign(n, x);
      } else if (numbers(dv, vm.key("decay"), c, decay) && decay.size() != n) {
        c.add(dv, vm.key("decay"), "expected " + std::to_string(n) + " entries");
        decay.assign(n, -1.0);
      }
    }
    s.beta = Volatility::vasicek_exp(scale, decay);
  }

  if (auto v = m.get("jump_volatility")) {
    Map jm(v, m.key("jump_volatility"), c);
    std::vector<double> scale(n, 0.0), decay(n, -1.0);
    if (jm.read_list("scale", scale) && scale.size() != n) {
      c.add(jm.get("scale"), jm.key("scale"), "expected " + std::to_string(n) + " entries");
      scale.assign(n, 0.0);
    }
    if (jm.read_list("decay", decay) && decay.size() != n) {
      c.add(jm.get("decay"), jm.key("decay"), "expected " + std::to_string(n) + " entries");
      decay.assign(n, -1.0);
    }
    s.gamma = JumpVolatility::exponential(scale, decay);
  }
  if (auto v = m.get("jumps")) s.jumps = read_jumps(v, m.key("jumps"), c);

  if (auto v = m.get("market")) {
    Map mk(v, m.key("market"), c);
    if (auto l = mk.get("lambda")) {
      if (l.IsSequence()) {
        if (l.size() != d) c.add(l, mk.key("lambda"), "expected " + std::to_string(d) + " entries");
        else
          for (std::size_t k = 0; k < d; ++k)
            s.market.lambda[k] = read_time_fn(l[k], mk.key("lambda") + "[" + std::to_string(k) + "]", c);
      } else {
        s.market.lambda.assign(d, read_time_fn(l, mk.key("lambda"), c));
      }
    }
    if (auto p = mk.get("psi")) s.market.psi = read_mark_fn(p, mk.key("psi"), c);
    if (auto k = mk.get("kappa")) s.market.kappa = read_mark_fn(k, mk.key("kappa"), c);
    double bound = 0.0;
    if (mk.read("Lambda_bound", bound)) s.market.Lambda_bound = bound;
  }

  if (auto v = m.get("spots")) {
    per_index(v, m.key("spots"), c, n, [&](std::size_t i, const YAML::Node& e, const std::string& k, bool all) {
      Map sm(e, k, c);
      SpotCoeffs sc = s.spots[i];
      if (auto a = sm.get("a")) sc.a = read_time_fn(a, sm.key("a"), c);
      if (auto b = sm.get("b")) {
        if (b.IsSequence()) {
          if (b.size() != d) c.add(b, sm.key("b"), "expected " + std::to_string(d) + " loadings");
          else
            for (std::size_t f = 0; f < d; ++f)
              sc.b[f] = read_time_fn(b[f], sm.key("b") + "[" + std::to_string(f) + "]", c);
        } else {
          sc.b.assign(d, read_time_fn(b, sm.key("b"), c));
        }
      }
      if (auto cc = sm.get("c")) sc.c = read_mark_fn(cc, sm.key("c"), c);
      if (all) s.spots.assign(n, sc);
      else s.spots[i] = sc;
    });
  }
  double bound = 0.0;
  if (m.read("beta_growth_bound", bound)) s.beta_growth_bound = bound;

  if (c.issues.empty()) {
    try {
      s.check_complete();
    } catch (const Error& e) {
      c.add(node, path, e.what());
    }
  }
  return s;
}

std::string emit(const YAML::Node& n) {
  YAML::Emitter e;
  e << n;
  return e.c_str();
}

}  // namespace

SimulationConfig ScenarioConfig::simulation() const {
  SimulationConfig s;
  s.grid = grid;
  s.n_paths = n_paths;
  s.seed = seed;
  s.threads = threads;
  s.maturities = maturities;
  s.record_every = record_every;
  return s;
}

const ModelSpec& ScenarioConfig::require_model(const std::string& command) const {
  if (!model) throw SpecError(command + " needs a model section");
  return *model;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

ModelSpec parse_model(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError({{e.mark.line + 1, "", e.msg}});
  }
  Ctx c;
  ModelSpec s = read_model(root, "", c);
  if (!c.issues.empty()) throw ConfigError(c.issues);
  return s;
}

ScenarioConfig parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError({{e.mark.line + 1, "", e.msg}});
  }
  Ctx c;
  ScenarioConfig cfg;
  if (!root.IsMap()) throw ConfigError({{line_of(root), "", "expected a mapping at top level"}});
  {
    Map top(root, "", c);

    const YAML::Node g = top.get("grid");
    if (!g) c.add(root, "grid", "required");
    {
      Map gm(g, "grid", c);
      double dxi = 0.0;
      gm.read("dt", cfg.grid.dt);
      const bool has_dxi = gm.read("dxi", dxi);
      gm.read("horizon_t", cfg.grid.horizon_t);
      gm.read("horizon_xi", cfg.grid.horizon_xi);
      gm.read("noise_dt", cfg.grid.noise_dt);
      if (has_dxi && std::abs(dxi - cfg.grid.dt) > 1e-12 * std::abs(cfg.grid.dt))
        c.add(gm.get("dxi"), "grid.dxi", "grid contract violated: dt must equal dxi");
      if (g && c.issues.empty()) {
        try {
          cfg.grid.validate();
        } catch (const GridError& e) {
          c.add(g, "grid", std::string("grid contract violated: ") + e.what());
        }
      }
    }

    if (top.read("n_paths", cfg.n_paths) && cfg.n_paths < 1) c.add(top.get("n_paths"), "n_paths", "must be at least 1");
    top.read("seed", cfg.seed);
    if (top.read("threads", cfg.threads) && cfg.threads < 1) c.add(top.get("threads"), "threads", "must be at least 1");
    top.read("output_dir", cfg.output_dir);
    top.read("record_every", cfg.record_every);
    if (top.read_list("maturities", cfg.maturities)) {
      for (double T : cfg.maturities)
        if (!(T > 0.0)) c.add(top.get("maturities"), "maturities", "maturities must be positive");
      const double mx = cfg.maturities.empty() ? 0.0 : *std::max_element(cfg.maturities.begin(), cfg.maturities.end());
      if (cfg.grid.horizon_xi < cfg.grid.horizon_t + mx - 1e-12)
        c.add(top.get("maturities"), "maturities", "horizon_xi must be at least horizon_t + max maturity");
    }

    if (auto cm = top.get("commands")) {
      if (!cm.IsSequence()) {
        c.add(cm, "commands", "expected a list of command names");
      } else {
        for (std::size_t k = 0; k < cm.size(); ++k) {
          std::string name;
          if (!scalar(cm[k], "commands[" + std::to_string(k) + "]", c, name)) continue;
          const auto& names = command_names();
          if (std::find(names.begin(), names.end(), name) == names.end())
            c.add(cm[k], "commands[" + std::to_string(k) + "]", "unknown command '" + name + "'");
          cfg.commands.push_back(name);
        }
      }
    }

    if (auto mv = top.get("model")) {
      cfg.model = read_model(mv, "model", c);
      cfg.model_yaml = emit(mv);
    }

    if (auto v = top.get("space")) {
      Map sm(v, "space", c);
      sm.read("rho", cfg.space.rho);
      sm.read("rho_prime", cfg.space.rho_prime);
    }
    cfg.validation.horizon_t = cfg.grid.horizon_t;
    cfg.validation.seed = cfg.seed;
    if (auto v = top.get("validation")) {
      Map vm(v, "validation", c);
      vm.read("step", cfg.validation.step);
      vm.read("intervals", cfg.validation.intervals);
      vm.read("horizon_t", cfg.validation.horizon_t);
      vm.read("curve_samples", cfg.validation.curve_samples);
      vm.read("radius", cfg.validation.radius);
      vm.read("seed", cfg.validation.seed);
    }

    if (auto v = top.get("simulate")) {
      Map sm(v, "simulate", c);
      sm.read("curve_paths", cfg.simulate.curve_paths);
      sm.read("scalar_paths", cfg.simulate.scalar_paths);
      if (sm.read("xi_stride", cfg.simulate.xi_stride) && cfg.simulate.xi_stride == 0)
        c.add(sm.get("xi_stride"), "simulate.xi_stride", "must be at least 1");
    }
    if (auto v = top.get("verify_drift")) {
      Map vm(v, "verify_drift", c);
      auto& o = cfg.verify_drift;
      vm.read("t_points", o.t_points);
      vm.read("T_points", o.T_points);
      vm.read("t_step", o.t_step);
      vm.read("T_min", o.T_min);
      vm.read("T_step", o.T_step);
      vm.read("tolerance", o.tolerance);
      vm.read("validate", o.validate);
    }
    if (auto v = top.get("martingale")) {
      Map mm(v, "martingale", c);
      mm.read_list("times", cfg.martingale.times);
      mm.read_list("maturities", cfg.martingale.maturities);
      mm.read("threshold", cfg.martingale.threshold);
    }
    if (auto v = top.get("monotonicity")) {
      Map mm(v, "monotonicity", c);
      mm.read("coeff_samples", cfg.monotonicity.coeff_samples);
      mm.read("tol", cfg.monotonicity.tol);
      mm.read("record_every", cfg.monotonicity.record_every);
    }
    if (auto v = top.get("affine")) {
      Map am(v, "affine", c);
      am.read("rho", cfg.affine.rho);
      am.read("tolerance", cfg.affine.tolerance);
      am.read_list("dts", cfg.affine.dts);
      am.read("paths", cfg.affine.paths);
    }
    if (auto v = top.get("mmm")) {
      Map mm(v, "mmm", c);
      auto& o = cfg.mmm;
      mm.read("alpha0", o.params.alpha0);
      mm.read("eta", o.params.eta);
      mm.read("x0", o.params.x0);
      if (auto r = mm.get("r")) o.params.r = read_time_fn(r, "mmm.r", c);
      if (auto a = mm.get("a")) {
        if (!a.IsSequence()) {
          c.add(a, "mmm.a", "expected one spot drift per index 0..m");
        } else {
          o.params.a.clear();
          for (std::size_t k = 0; k < a.size(); ++k)
            o.params.a.push_back(read_time_fn(a[k], "mmm.a[" + std::to_string(k) + "]", c));
        }
      }
      mm.read_list("spots0", o.params.spots0);
      mm.read("t", o.t);
      mm.read("T", o.T);
      mm.read("dt", o.dt);
      mm.read("supplementary_dt", o.supplementary_dt);
      mm.read("paths", o.paths);
      mm.read_list("maturities", o.maturities);
      mm.read("deflator_dt", o.deflator_dt);
      mm.read("curve_step", o.curve_step);
      mm.read("curve_intervals", o.curve_intervals);
      mm.read("integral_tol", o.integral_tol);
      if (auto s = mm.get("supplementary")) {
        if (!s.IsSequence()) {
          c.add(s, "mmm.supplementary", "expected a list of [t, T] pairs");
        } else {
          for (std::size_t k = 0; k < s.size(); ++k) {
            std::vector<double> p;
            const std::string kk = "mmm.supplementary[" + std::to_string(k) + "]";
            if (numbers(s[k], kk, c, p)) {
              if (p.size() == 2) o.supplementary.emplace_back(p[0], p[1]);
              else c.add(s[k], kk, "expected [t, T]");
            }
          }
        }
      }
      if (c.issues.empty()) {
        try {
          o.params.validate();
        } catch (const Error& e) {
          c.add(v, "mmm", e.what());
        }
      }
    }
  }
  if (!c.issues.empty()) {
    std::stable_sort(c.issues.begin(), c.issues.end(), [](const auto& a, const auto& b) { return a.line < b.line; });
    throw ConfigError(c.issues);
  }

  YAML::Node canon = YAML::Clone(root);
  canon.remove("threads");
  canon.remove("output_dir");
  canon["seed"] = cfg.seed;
  canon["n_paths"] = cfg.n_paths;
  cfg.canonical = emit(canon);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{0, path, "cannot open config file"}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void apply_overrides(ScenarioConfig& cfg, const Overrides& o) {
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.validation.seed = *o.seed;
  }
  if (o.paths) {
    if (*o.paths < 1) throw ConfigError({{0, "--paths", "must be at least 1"}});
    cfg.n_paths = *o.paths;
  }
  if (o.threads) cfg.threads = std::max<std::size_t>(1, *o.threads);
  if (o.out) cfg.output_dir = *o.out;
  YAML::Node canon = YAML::Load(cfg.canonical);
  canon["seed"] = cfg.seed;
  canon["n_paths"] = cfg.n_paths;
  cfg.canonical = emit(canon);
}

}  // namespace hjm
