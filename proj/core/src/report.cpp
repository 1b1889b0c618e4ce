#include "rrdo/lab/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rrdo/error.hpp"

namespace rrdo::lab {

namespace {

void append_number(std::string& out, double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  out.append(buf.data(), res.ptr);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kNumericalFailure, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::kNumericalFailure, "write failed for " + path.string());
}

}  // namespace

Verdict check(std::string name, std::string criterion, double measured, std::string relation,
              double threshold, std::string detail) {
  Verdict v{std::move(name), std::move(criterion), false, measured, threshold, std::move(relation), std::move(detail)};
  if (v.relation == "<=") {
    v.passed = measured <= threshold;
  } else if (v.relation == ">=") {
    v.passed = measured >= threshold;
  } else if (v.relation == "<") {
    v.passed = measured < threshold;
  } else if (v.relation == ">") {
    v.passed = measured > threshold;
  } else if (v.relation == "==") {
    v.passed = measured == threshold;
  } else {
    throw Error(ErrorKind::kInvalidInput, "unknown relation " + v.relation);
  }
  return v;
}

std::string to_csv(const Trace& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  const std::size_t w = t.columns.size();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (c) out += ',';
      append_number(out, t.values[r * w + c]);
    }
    out += '\n';
  }
  return out;
}

bool RunReport::all_passed() const {
  for (const auto& v : verdicts) {
    if (!v.passed) return false;
  }
  return true;
}

std::string input_hash(const ExperimentConfig& c) {
  const std::string body = c.to_json().dump();
  std::string blob = "blob " + std::to_string(body.size());
  blob.push_back('\0');
  blob += body;

  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md.data(), &len, EVP_sha1(), nullptr) != 1) {
    throw Error(ErrorKind::kNumericalFailure, "SHA-1 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

nlohmann::json summary_json(const RunReport& r) {
  nlohmann::json j;
  j["experiment"] = to_string(r.config.experiment);
  j["config"] = r.config.to_json();
  j["input_hash"] = input_hash(r.config);
  j["all_passed"] = r.all_passed();
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : r.verdicts) {
    j["verdicts"].push_back({{"name", v.name},
                             {"criterion", v.criterion},
                             {"passed", v.passed},
                             {"measured", v.measured},
                             {"relation", v.relation},
                             {"threshold", v.threshold},
                             {"detail", v.detail}});
  }
  j["measurements"] = r.measurements;
  j["warnings"] = r.warnings;
  j["trace"] = {{"file", "trace.csv"}, {"rows", r.trace.rows()}, {"columns", r.trace.columns}};
  j["timing"] = {{"wall_seconds", r.wall_seconds}, {"threads", r.threads}};
  return j;
}

nlohmann::json error_summary(const ExperimentConfig& c, const std::string& kind, const std::string& message) {
  nlohmann::json j;
  j["experiment"] = to_string(c.experiment);
  j["config"] = c.to_json();
  j["input_hash"] = input_hash(c);
  j["all_passed"] = false;
  j["error"] = {{"kind", kind}, {"message", message}};
  return j;
}

void write_summary(const nlohmann::json& summary, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

void write_outputs(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "trace.csv", to_csv(r.trace));
  write_summary(summary_json(r), dir);
}

}  // namespace rrdo::lab
