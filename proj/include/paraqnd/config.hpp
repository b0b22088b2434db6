#pragma once

// Experiment configuration as JSON with nested sections. Unknown keys are
// rejected, defaults are filled in, and physical parameters are in units g = 1.
//
//   {"experiment": "qnd-protocol", "seed": 1, "threads": 1, "output": "out",
//    "system": {"Delta": 150, "g_tilde": 1}, "protocol": {...}, ...}
//
// The system section takes either (Delta, g_tilde) or the phase mismatch and
// pump coupling (delta, r) with delta > r >= 0.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "paraqnd/gkp.hpp"
#include "paraqnd/io.hpp"
#include "paraqnd/opo.hpp"
#include "paraqnd/qnd.hpp"
#include "paraqnd/validation.hpp"

namespace paraqnd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { qnd_protocol, povm_purity, gkp_generate, opo_trajectories, validate };

std::string experiment_name(Experiment e);
/// Throws ConfigError for an unknown name.
Experiment experiment_from_name(const std::string& name);

std::string hamiltonian_name(HamiltonianVariant v);
HamiltonianVariant hamiltonian_from_name(const std::string& name);

struct ExperimentConfig {
  Experiment experiment = Experiment::validate;
  std::uint64_t seed = 1;
  Index threads = 1;
  std::string output = "out";

  // Only the section matching `experiment` is read and written.
  QNDConfig qnd;
  PovmConfig povm;
  GKPConfig gkp;
  OPOConfig opo;
  HamiltonianVariant opo_hamiltonian = HamiltonianVariant::effective;
  Index opo_n_signal = 40;  // signal levels for the non-effective OPO variants
  ValidationConfig validation;
};

/// Throws ConfigError naming the offending key (unknown, missing, wrong type or
/// non-physical value).
ExperimentConfig parse_config(const std::string& text);

/// Canonical JSON form; parse_config(config_to_json(c).dump()) reproduces c.
Json config_to_json(const ExperimentConfig& config);

/// SHA-256 of the canonical JSON text.
std::string config_hash(const ExperimentConfig& config);

}  // namespace paraqnd
