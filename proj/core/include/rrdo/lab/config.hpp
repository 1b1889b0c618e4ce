#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rrdo/spin.hpp"

namespace rrdo::lab {

enum class Experiment { kDecay, kCesaro, kForwardLimit, kLyapunov, kMarkov, kSpinTau, kSpinEnergy, kFactorization };

std::string to_string(Experiment e);
/// Throws kUsage for unknown names.
Experiment parse_experiment(const std::string& name);
const std::vector<std::string>& experiment_names();

enum class EnsembleType { kStochastic, kDirichlet, kMatrix, kSpin, kSpinUniformTau };

struct EnsembleSpec {
  EnsembleType type = EnsembleType::kStochastic;
  nlohmann::json json;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kDecay;
  EnsembleSpec ensemble;
  std::uint64_t steps = 1;
  std::uint64_t trajectories = 1;
  std::uint64_t seed = 0;
  /// Defaults for the chosen experiment merged with the overrides given.
  std::map<std::string, double> tolerances;
  std::string output_dir = "rrdo-out";

  /// Canonical JSON echo; reflects CLI overrides applied via the setters.
  nlohmann::json to_json() const;
};

/// Default tolerance table of an experiment; also the set of accepted names.
std::map<std::string, double> default_tolerances(Experiment e);

/// Strict parse. Every diagnostic is an Error of kind kUsage whose message
/// starts with "line L, column C:" when a position is known.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Spin parameters of a "spin" ensemble: base fields merged into each atom.
std::vector<std::pair<spin::SpinParams, double>> spin_atoms(const EnsembleSpec& spec);
spin::SpinParams spin_base(const EnsembleSpec& spec);

}  // namespace rrdo::lab
