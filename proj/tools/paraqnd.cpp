// Command-line driver.
//
//   paraqnd <qnd-protocol|povm-purity|gkp-generate|opo-trajectories|validate>
//           [--config <path>] [--seed <int>] [--out <dir>] [--threads <int>]
//
// Exit status: 0 success, 1 a physics check failed or a module errored,
// 2 configuration or usage error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "paraqnd/config.hpp"
#include "paraqnd/experiments.hpp"

using namespace paraqnd;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<Index> threads;
  bool quiet = false;
};

std::string load_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig resolve(const std::string& experiment, const Options& o) {
  Json j = Json::object();
  if (!o.config.empty()) {
    const std::string text = load_text(o.config);
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(o.config + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(o.config + ": top level must be an object");
  }
  if (!j.contains("experiment")) {
    // keep "experiment" first in the stored config
    Json k = Json{{"experiment", experiment}};
    k.update(j);
    j = std::move(k);
  } else if (j["experiment"] != experiment) {
    throw ConfigError("config is for '" + j["experiment"].dump() + "' but the subcommand is " + experiment);
  }
  if (o.seed) j["seed"] = *o.seed;
  if (o.threads) j["threads"] = *o.threads;
  if (o.out) j["output"] = *o.out;
  return parse_config(j.dump());
}

int run(const std::string& experiment, const Options& o) {
  try {
    const ExperimentConfig c = resolve(experiment, o);
    Logger log;
    if (!o.quiet) log = [](const std::string& line) { std::cerr << line << std::endl; };
    const RunManifest m = run_experiment(c, c.output, log);
    for (const CriterionResult& r : m.criteria) std::cout << r.summary_line() << "\n";
    int failed = 0;
    for (const CheckResult& k : m.checks)
      if (!k.pass) {
        ++failed;
        if (m.criteria.empty())
          std::cout << "check failed: " << k.name << " = " << format_number(k.value) << " " << k.relation << " "
                    << format_number(k.limit) << " is false\n";
      }
    std::cout << experiment << ": " << m.files.size() + 1 << " files in " << c.output << ", "
              << m.checks.size() - failed << "/" << m.checks.size() << " checks passed\n";
    return m.pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated-Fock-space simulator of parametric QND measurement, GKP generation and OPO trajectories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  Options o;
  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"qnd-protocol", "Conditional signal states after a pump homodyne measurement"},
      {"povm-purity", "Purity of the pump-homodyne POVM across outcomes and widths"},
      {"gkp-generate", "GKP state generation by general-dyne signal detection"},
      {"opo-trajectories", "Monitored OPO trajectories with signal loss"},
      {"validate", "Run the acceptance criteria and write a report"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Master seed (overrides the config)");
    sub->add_option("--out", o.out, "Output directory (overrides the config)");
    sub->add_option("--threads", o.threads, "Worker threads (overrides the config)")->check(CLI::Range(1, 4096));
    sub->add_flag("-q,--quiet", o.quiet, "No progress messages");
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return run(chosen, o);
}
