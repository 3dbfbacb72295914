#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "hjm/scenario.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("hjm");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("HJM_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

struct Flags {
  std::string config;
  hjm::Overrides o;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "scenario file (YAML)")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", f.o.seed, "override the seed");
  app->add_option("--paths", f.o.paths, "override n_paths");
  app->add_option("--out", f.o.out, "output directory");
  app->add_option("--threads", f.o.threads, "worker threads (results do not depend on it)");
}

int execute(const Flags& f, const std::string& command) {
  hjm::ScenarioConfig cfg;
  try {
    cfg = hjm::load_scenario(f.config);
    hjm::apply_overrides(cfg, f.o);
  } catch (const hjm::ConfigError& e) {
    nlohmann::json j{{"status", "config-error"}, {"errors", nlohmann::json::array()}};
    for (const auto& i : e.issues()) j["errors"].push_back({{"line", i.line}, {"key", i.key}, {"reason", i.reason}});
    std::cerr << e.what() << "\n";
    std::cout << j.dump() << "\n";
    return 2;
  }
  std::vector<std::string> cmds = command == "run" ? cfg.commands : std::vector<std::string>{command};
  spdlog::info("config {} hash {:016x}, {} command(s), {} thread(s)", f.config, hjm::fnv1a(cfg.canonical),
               cmds.size(), cfg.threads);
  for (const auto& c : cmds) spdlog::debug("queued {}", c);
  try {
    const hjm::RunSummary s = hjm::run(cfg, cmds);
    for (const auto& r : s.results)
      spdlog::info("{}: {}", r.command, r.report.value("status", std::string("?")));
    nlohmann::json out{{"status", s.manifest["status"]}, {"output_dir", cfg.output_dir},
                       {"failures", s.manifest["failures"]}};
    std::cout << out.dump() << "\n";
    return s.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cout << nlohmann::json{{"status", "error"}, {"error", e.what()}}.dump() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"HJM multi-curve simulation and model checks"};
  app.require_subcommand(1);
  std::vector<std::string> names = hjm::command_names();
  names.push_back("run");
  std::vector<Flags> flags(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto* sub = app.add_subcommand(names[k], names[k] == "run" ? "run the commands listed in the config"
                                                              : "run " + names[k] + " on the config");
    add_flags(sub, flags[k]);
  }
  CLI11_PARSE(app, argc, argv);
  for (std::size_t k = 0; k < names.size(); ++k)
    if (app.got_subcommand(names[k])) return execute(flags[k], names[k]);
  return 1;
}
