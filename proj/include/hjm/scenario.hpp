#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hjm/errors.hpp"
#include "hjm/mmm.hpp"
#include "hjm/model.hpp"
#include "hjm/solver.hpp"

namespace hjm {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "hjm-report/1";
inline constexpr const char* kManifestSchema = "hjm-manifest/1";

struct ConfigIssue {
  int line = 0;  // 1-based, 0 when unknown
  std::string key;
  std::string reason;
  std::string str() const;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate",        "verify-drift", "check-monotonicity",
                                              "realize-affine",  "mmm",          "martingale-test"};
  return names;
}

struct SimulateOptions {
  std::size_t curve_paths = 1;    // paths whose full curves go to the curves table
  std::size_t scalar_paths = 100; // paths exported to the paths table
  std::size_t xi_stride = 10;
};

struct VerifyDriftOptions {
  std::size_t t_points = 20, T_points = 20;
  double t_step = 0.04;
  double T_min = 0.2, T_step = 0.24;
  double tolerance = 1e-6;
  bool validate = true;
};

struct MartingaleOptions {
  std::vector<double> times;       // empty: final record
  std::vector<double> maturities;  // empty: top-level maturities
  double threshold = 3.0;
};

struct MonotonicityOptions {
  std::size_t coeff_samples = 200;
  double tol = 1e-10;
  std::size_t record_every = 1;
};

struct AffineOptions {
  double rho = 1.0;
  double tolerance = 5e-3;
  std::vector<double> dts;  // empty: the grid dt only
  std::size_t paths = 0;    // zero: n_paths
};

struct MmmOptions {
  MmmParams params;
  double t = 0.0, T = 1.0;
  double dt = 1e-3;
  std::size_t paths = 0;  // zero: n_paths
  std::vector<std::pair<double, double>> supplementary;
  double supplementary_dt = 1e-2;
  std::vector<double> maturities{1.0, 2.0, 5.0};
  double deflator_dt = 1e-2;
  double curve_step = 0.01;
  std::size_t curve_intervals = 1000;
  double integral_tol = 1e-6;
};

struct ScenarioConfig {
  SimulationGrid grid;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::vector<double> maturities;
  std::size_t record_every = 0;
  std::string output_dir = "hjm-out";
  std::vector<std::string> commands;

  std::optional<ModelSpec> model;
  SpaceParams space;
  ValidationGrid validation;

  SimulateOptions simulate;
  VerifyDriftOptions verify_drift;
  MartingaleOptions martingale;
  MonotonicityOptions monotonicity;
  AffineOptions affine;
  MmmOptions mmm;

  // normalized document, used for hashing and for writing the spec back out
  std::string canonical;
  std::string model_yaml;

  SimulationConfig simulation() const;
  const ModelSpec& require_model(const std::string& command) const;
};

// Throws ConfigError listing every problem found.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

// Parses a bare model section (the same keys as `model:` in a scenario).
ModelSpec parse_model(const std::string& text);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
};
void apply_overrides(ScenarioConfig& cfg, const Overrides& o);

// FNV-1a, 64 bit
std::uint64_t fnv1a(const std::string& s);

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string to_csv(const Table& t);
std::string format_double(double v);

struct CommandResult {
  std::string command;
  bool pass = true;
  nlohmann::json report;  // filled with schema, command and status by run_command
  std::vector<Table> tables;
};

CommandResult run_command(const ScenarioConfig& cfg, const std::string& command);

struct RunSummary {
  int exit_code = 0;
  std::vector<CommandResult> results;
  nlohmann::json manifest;
};

// Runs the commands in order and writes <out>/<command>.json, <out>/<command>_<table>.csv
// and <out>/manifest.json.
RunSummary run(const ScenarioConfig& cfg, const std::vector<std::string>& commands);

std::vector<std::string> write_report(const std::string& dir, const std::vector<CommandResult>& results,
                                      const ScenarioConfig& cfg, nlohmann::json* manifest_out = nullptr);

}  // namespace hjm
