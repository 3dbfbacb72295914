#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hjm/scenario.hpp"

using namespace hjm;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(grid: {dt: 0.01, horizon_t: 1, horizon_xi: 3}
commands: [verify-drift]
)";

const char* kVasicek = R"(grid: {dt: 0.01, dxi: 0.01, horizon_t: 0.5, horizon_xi: 6}
maturities: [1, 2, 5]
n_paths: 400
commands: [verify-drift, martingale-test]
model:
  m: 1
  volatility: {scale: [[0.01], [0.012]], decay: [-1.0, -0.8]}
  market: {lambda: [0.2]}
  spots: [{a: 0, b: [0]}, {a: 0, b: [0.1]}]
)";

std::vector<ConfigIssue> issues_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<ConfigIssue>& is, const std::string& needle) {
  for (const auto& i : is)
    if (i.str().find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hjm-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const ScenarioConfig c = parse_scenario(kMinimal);
  CHECK(c.n_paths == 10000);
  CHECK(c.seed == 42);
  CHECK(c.threads == 1);
  CHECK(c.commands == std::vector<std::string>{"verify-drift"});
  CHECK(!c.model);
  CHECK(c.grid.dt == 0.01);
}

TEST_CASE("parse errors carry line and key") {
  SUBCASE("dt and dxi disagree") {
    const auto is = issues_of("grid: {dt: 0.01, dxi: 0.02, horizon_t: 1, horizon_xi: 3}\n");
    REQUIRE(is.size() == 1);
    CHECK(is[0].line == 1);
    CHECK(is[0].key == "grid.dxi");
    CHECK(mentions(is, "grid contract violated"));
  }
  SUBCASE("negative intensity") {
    const auto is = issues_of(R"(grid: {dt: 0.01, horizon_t: 1, horizon_xi: 3}
model:
  jumps:
    truncated_exponential: {intensity: -1, rate: 2, x_max: 1}
)");
    REQUIRE(is.size() == 1);
    CHECK(is[0].line == 4);
    CHECK(mentions(is, "JumpMeasureSpec"));
  }
  SUBCASE("negative atom weight") {
    const auto is = issues_of("grid: {dt: 0.01, horizon_t: 1, horizon_xi: 3}\nmodel: {jumps: {atomic: [[1, -0.5]]}}\n");
    CHECK(mentions(is, "JumpMeasureSpec"));
  }
  SUBCASE("unknown keys are errors at every depth") {
    const auto is = issues_of(R"(grid: {dt: 0.01, horizon_t: 1, horizon_xi: 3}
n_path: 5
model:
  volatility: {scale: [[0.01], [0.01]], decya: [-1, -1]}
)");
    REQUIRE(is.size() == 2);
    CHECK(is[0].line == 2);
    CHECK(is[0].key == "n_path");
    CHECK(is[1].key == "model.volatility.decya");
    CHECK(is[1].line == 4);
  }
  SUBCASE("every problem is reported") {
    const auto is = issues_of(R"(grid: {dt: 0.01, horizon_t: 1, horizon_xi: 3}
n_paths: 0
seed: -3
commands: [simulate, explode]
)");
    CHECK(is.size() == 3);
    CHECK(mentions(is, "n_paths"));
    CHECK(mentions(is, "seed"));
    CHECK(mentions(is, "unknown command 'explode'"));
  }
  SUBCASE("maturity beyond the curve horizon") {
    CHECK(mentions(issues_of("grid: {dt: 0.01, horizon_t: 1, horizon_xi: 3}\nmaturities: [2.5]\n"), "max maturity"));
  }
  SUBCASE("row count of the volatility table") {
    CHECK(mentions(issues_of("grid: {dt: 0.01, horizon_t: 1, horizon_xi: 3}\nmodel: {m: 2, volatility: {scale: [[0.01]]}}\n"),
                   "expected 3 rows"));
  }
  SUBCASE("not yaml") { CHECK(!issues_of("grid: [1, 2\n").empty()); }
  SUBCASE("missing grid") { CHECK(mentions(issues_of("seed: 1\n"), "grid")); }
}

TEST_CASE("model section round-trips through its canonical text") {
  const ScenarioConfig c = parse_scenario(kVasicek);
  REQUIRE(c.model);
  const ModelSpec again = parse_model(c.model_yaml);
  const CurveFamily a = c.model->initial_family(0.01, 100), b = again.initial_family(0.01, 100);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k <= 100; ++k) CHECK(a[i].values()[k] == b[i].values()[k]);
  CHECK(again.beta.scale() == c.model->beta.scale());
  CHECK(again.beta.decay() == c.model->beta.decay());
  CHECK(again.lambda(0, 0.3) == c.model->lambda(0, 0.3));
  CHECK(again.spots[1].b[0](0.0) == doctest::Approx(0.1));
}

TEST_CASE("config hash tracks seed and paths but not threads or output") {
  ScenarioConfig a = parse_scenario(kVasicek), b = parse_scenario(kVasicek);
  apply_overrides(b, {std::nullopt, std::nullopt, 8, std::string("/tmp/elsewhere")});
  CHECK(fnv1a(a.canonical) == fnv1a(b.canonical));
  apply_overrides(b, {7, std::nullopt, std::nullopt, std::nullopt});
  CHECK(fnv1a(a.canonical) != fnv1a(b.canonical));
  CHECK(b.seed == 7);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("csv is long format with shortest round-trip numbers") {
  Table t{"x", {"path", "t", "index", "xi", "value"}, {{std::int64_t{0}, 0.1, std::int64_t{2}, 1e-3, 1.0 / 3.0}}};
  CHECK(to_csv(t) == "path,t,index,xi,value\n0,0.1,2,0.001,0.3333333333333333\n");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("empty results write a manifest only") {
  const fs::path dir = scratch("empty");
  const ScenarioConfig c = parse_scenario(kMinimal);
  nlohmann::json m;
  const auto files = write_report(dir.string(), {}, c, &m);
  CHECK(files == std::vector<std::string>{"manifest.json"});
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
  CHECK(m["schema"] == kManifestSchema);
  CHECK(m["seed"] == 42);
  CHECK(m["version"] == kVersion);
  CHECK(m["status"] == "pass");
  CHECK(slurp(dir / "manifest.json").find("time") == std::string::npos);
}

TEST_CASE("verify-drift on the Vasicek spec passes") {
  const ScenarioConfig c = parse_scenario(kVasicek);
  const CommandResult r = run_command(c, "verify-drift");
  CHECK(r.pass);
  CHECK(r.report["status"] == "pass");
  CHECK(r.report["schema"] == kReportSchema);
  CHECK(r.report["max_residual"].get<double>() < 1e-6);
  REQUIRE(r.tables.size() == 1);
  CHECK(r.tables[0].rows.size() > 300);
}

TEST_CASE("martingale-test flags a broken drift with the failing points") {
  ScenarioConfig c = parse_scenario(std::string(kVasicek) + "martingale: {times: [0.5]}\n");
  c.model->measure = Measure::RiskNeutral;
  CHECK(run_command(c, "martingale-test").pass);
  c.model->drift_bump = 0.05;
  const CommandResult r = run_command(c, "martingale-test");
  CHECK(!r.pass);
  CHECK(r.report["status"] == "fail");
  REQUIRE(!r.report["failures"].empty());
  const auto& f = r.report["failures"][0];
  CHECK(f.contains("index"));
  CHECK(f.contains("maturity"));
  CHECK(f["t"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("a failing monotonicity report carries the counterexample curves") {
  ScenarioConfig c = parse_scenario(R"(grid: {dt: 0.01, horizon_t: 0.2, horizon_xi: 3}
n_paths: 20
maturities: [1]
model:
  m: 2
  spot_drift: specified
  initial_curves: [0.03, 0.035, 0.033]
  volatility: {scale: [[0.01], [0.01], [0.02]], decay: [-1, -1, -1]}
monotonicity: {coeff_samples: 40}
)");
  const CommandResult r = run_command(c, "check-monotonicity");
  CHECK(!r.pass);
  CHECK(r.report["status"] == "fail");
  REQUIRE(r.report.contains("counterexample"));
  CHECK(r.report["counterexample"]["family"].size() == 3);
  CHECK(r.report["counterexample"]["family"][0]["value"].size() > 10);
}

TEST_CASE("run writes reports and is byte-identical across thread counts") {
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  ScenarioConfig c = parse_scenario(std::string(kVasicek) + "simulate: {curve_paths: 2, scalar_paths: 5, xi_stride: 25}\n");
  c.n_paths = 60;
  c.output_dir = d1.string();
  c.threads = 1;
  const std::vector<std::string> cmds{"simulate", "verify-drift", "martingale-test"};
  const RunSummary s1 = run(c, cmds);
  c.output_dir = d2.string();
  c.threads = 3;
  const RunSummary s2 = run(c, cmds);
  CHECK(s1.exit_code == 0);
  CHECK(s2.exit_code == 0);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(d1)) {
    CHECK(slurp(e.path()) == slurp(d2 / e.path().filename()));
    ++n;
  }
  CHECK(n == 10);
  const std::string curves = slurp(d1 / "simulate_curves.csv");
  CHECK(curves.rfind("path,t,index,xi,value\n", 0) == 0);
}

TEST_CASE("command errors become error reports and a nonzero exit") {
  const fs::path d = scratch("err");
  ScenarioConfig c = parse_scenario(kMinimal);
  c.output_dir = d.string();
  const RunSummary s = run(c, {"simulate"});
  CHECK(s.exit_code == 1);
  CHECK(s.results[0].report["status"] == "error");
  CHECK(s.manifest["failures"][0]["error"].get<std::string>().find("model") != std::string::npos);
}
