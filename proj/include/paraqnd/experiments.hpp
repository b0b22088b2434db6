#pragma once

// Experiment orchestration: runs one configured experiment, writes its CSV/JSON
// artifacts and finally manifest.json with checksums and check results.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "paraqnd/config.hpp"
#include "paraqnd/io.hpp"
#include "paraqnd/validation.hpp"

namespace paraqnd {

/// A module failed while running an experiment.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string code_version();

struct RunManifest {
  std::string experiment;
  std::string config_hash;
  std::string code_version;
  std::string started;   // UTC, ISO 8601
  std::string finished;
  std::uint64_t seed = 0;
  std::string seed_policy;
  std::vector<OutputFile> files;  // everything except manifest.json itself
  std::vector<CheckResult> checks;
  std::vector<CriterionResult> criteria;  // validate only

  bool pass() const;
};

Json manifest_json(const RunManifest& manifest);
Json criterion_json(const CriterionResult& criterion);

using Logger = std::function<void(const std::string&)>;

/// Writes into `directory` (config.output when empty). Module errors are
/// rethrown with the experiment name prepended: DomainError as ConfigError,
/// anything else as ExperimentError.
RunManifest run_experiment(const ExperimentConfig& config, std::filesystem::path directory = {},
                           const Logger& log = {});

}  // namespace paraqnd
