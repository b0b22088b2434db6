#pragma once

// Acceptance suite: the seven reproduction and invariant criteria, each a list
// of named numeric checks against fixed limits.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "paraqnd/types.hpp"

namespace paraqnd {

struct CheckResult {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<", "<=", ">", ">=", "=="
  double limit = 0.0;
  bool pass = false;
};

/// Evaluates `value relation limit`; NaN fails every relation.
CheckResult make_check(std::string name, double value, const std::string& relation, double limit);

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckResult> checks;
  /// Reported numbers that are not gated.
  std::vector<std::pair<std::string, double>> info;
  std::string error;  // exception text if the criterion could not run
  double seconds = 0.0;

  bool pass() const;
  /// One line: "criterion <id> PASS|FAIL <title> (...)".
  std::string summary_line() const;
};

struct ValidationConfig {
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7};
  std::uint64_t seed = 1;
  Index threads = 1;
  // Fig. 1 protocol truncation (criteria 1 and 2).
  Index qnd_n_signal = 60;
  Index qnd_n_pump = 360;
  Index qnd_hd_n_pump = 420;  // the exact Hamiltonian spreads the pump further
  Index oracle_outcomes = 25;
  // Fig. 4 trajectories and the ensemble-versus-master-equation check (criterion 5).
  Index opo_trajectories = 20;
  double opo_duration = 100.0;
  Index ensemble_members = 200;
};

/// Runs the selected criteria in order; `progress` is called after each.
/// Throws DomainError for an unknown criterion id.
std::vector<CriterionResult> run_validation(const ValidationConfig& config,
                                            const std::function<void(const CriterionResult&)>& progress = {});

}  // namespace paraqnd
