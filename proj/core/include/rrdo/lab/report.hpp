#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rrdo/lab/config.hpp"

namespace rrdo::lab {

struct Verdict {
  std::string name;
  /// Acceptance criterion this verdict checks, e.g. "decay".
  std::string criterion;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  /// "<=", ">=", "<", ">" or "==" between measured and threshold.
  std::string relation = "<=";
  std::string detail;
};

Verdict check(std::string name, std::string criterion, double measured, std::string relation,
              double threshold, std::string detail = {});

/// Row-major table; first column is usually n.
struct Trace {
  std::vector<std::string> columns;
  std::vector<double> values;

  std::size_t rows() const { return columns.empty() ? 0 : values.size() / columns.size(); }
  void append(std::initializer_list<double> row) { values.insert(values.end(), row); }
  void append(const std::vector<double>& row) { values.insert(values.end(), row.begin(), row.end()); }
};

/// Shortest round-trip formatting; integral columns print without exponent.
std::string to_csv(const Trace& t);

struct RunReport {
  ExperimentConfig config;
  std::vector<Verdict> verdicts;
  nlohmann::json measurements = nlohmann::json::object();
  std::vector<std::string> warnings;
  Trace trace;
  double wall_seconds = 0.0;
  unsigned threads = 1;

  bool all_passed() const;
};

/// SHA-1 of "blob <len>\0<canonical config JSON>", hex.
std::string input_hash(const ExperimentConfig& c);

nlohmann::json summary_json(const RunReport& r);
nlohmann::json error_summary(const ExperimentConfig& c, const std::string& kind, const std::string& message);

/// Writes trace.csv and summary.json under dir (created if needed).
void write_outputs(const RunReport& r, const std::filesystem::path& dir);
void write_summary(const nlohmann::json& summary, const std::filesystem::path& dir);

}  // namespace rrdo::lab
