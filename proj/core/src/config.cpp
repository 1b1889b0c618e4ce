#include "rrdo/lab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rrdo/error.hpp"

namespace rrdo::lab {

namespace {

using nlohmann::json;

struct Location {
  std::size_t line = 0;
  std::size_t column = 0;
};

Location location_of_offset(const std::string& text, std::size_t offset) {
  Location loc{1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

// First occurrence of "key" used as an object key.
Location location_of_key(const std::string& text, const std::string& key) {
  const std::string quoted = '"' + key + '"';
  for (std::size_t pos = text.find(quoted); pos != std::string::npos; pos = text.find(quoted, pos + 1)) {
    std::size_t k = pos + quoted.size();
    while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
    if (k < text.size() && text[k] == ':') return location_of_offset(text, pos);
  }
  return {};
}

class Diagnostics {
 public:
  explicit Diagnostics(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    std::ostringstream os;
    const Location loc = key.empty() ? Location{} : location_of_key(text_, key);
    if (loc.line > 0) os << "line " << loc.line << ", column " << loc.column << ": ";
    os << message;
    throw Error(ErrorKind::kUsage, os.str());
  }

  void require_object(const json& j, const std::string& key, const std::string& what) const {
    if (!j.is_object()) fail(key, what + " must be a JSON object");
  }

  void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) const {
    for (const auto& [k, v] : j.items()) {
      if (!allowed.count(k)) fail(k, "unknown key \"" + k + "\" in " + where);
    }
  }

  double number(const json& j, const std::string& key) const {
    if (!j.is_number()) fail(key, "\"" + key + "\" must be a number");
    return j.get<double>();
  }

  std::uint64_t count(const json& j, const std::string& key, std::uint64_t min) const {
    if (j.is_number_unsigned()) {
      const auto v = j.get<std::uint64_t>();
      if (v < min) fail(key, "\"" + key + "\" out of range: must be >= " + std::to_string(min));
      return v;
    }
    if (j.is_number_integer()) {
      fail(key, "\"" + key + "\" out of range: must be >= " + std::to_string(min));
    }
    fail(key, "\"" + key + "\" must be a non-negative integer");
  }

 private:
  const std::string& text_;
};

const std::map<std::string, EnsembleType>& ensemble_types() {
  static const std::map<std::string, EnsembleType> kTypes = {
      {"stochastic", EnsembleType::kStochastic},
      {"dirichlet", EnsembleType::kDirichlet},
      {"matrix", EnsembleType::kMatrix},
      {"spin", EnsembleType::kSpin},
      {"spin-uniform-tau", EnsembleType::kSpinUniformTau},
  };
  return kTypes;
}

const std::set<std::string> kSpinFields = {"e_s", "e_e", "beta", "lambda", "tau"};

void check_matrix_rows(const Diagnostics& diag, const json& m, bool allow_complex) {
  if (!m.is_array() || m.empty()) diag.fail("matrix", "\"matrix\" must be a non-empty array of rows");
  const std::size_t d = m.size();
  for (const auto& row : m) {
    if (!row.is_array() || row.size() != d) diag.fail("matrix", "\"matrix\" must be square");
    for (const auto& x : row) {
      const bool pair = allow_complex && x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number();
      if (!x.is_number() && !pair) {
        diag.fail("matrix", allow_complex ? "matrix entries must be numbers or [re, im] pairs"
                                          : "matrix entries must be numbers");
      }
    }
  }
}

void check_atoms(const Diagnostics& diag, const json& atoms, const std::set<std::string>& allowed,
                 bool need_matrix, bool allow_complex) {
  if (!atoms.is_array() || atoms.empty()) diag.fail("atoms", "\"atoms\" must be a non-empty array");
  for (const auto& a : atoms) {
    diag.require_object(a, "atoms", "each atom");
    diag.check_keys(a, allowed, "atom");
    if (!a.contains("weight")) diag.fail("atoms", "atom is missing \"weight\"");
    diag.number(a.at("weight"), "weight");
    if (need_matrix) {
      if (!a.contains("matrix")) diag.fail("atoms", "atom is missing \"matrix\"");
      check_matrix_rows(diag, a.at("matrix"), allow_complex);
    }
    for (const auto& f : kSpinFields) {
      if (a.contains(f)) diag.number(a.at(f), f);
    }
  }
}

EnsembleSpec parse_ensemble(const Diagnostics& diag, const json& j) {
  diag.require_object(j, "ensemble", "\"ensemble\"");
  if (!j.contains("type") || !j.at("type").is_string()) diag.fail("ensemble", "ensemble needs a string \"type\"");
  const auto name = j.at("type").get<std::string>();
  const auto it = ensemble_types().find(name);
  if (it == ensemble_types().end()) diag.fail("type", "unknown ensemble type \"" + name + "\"");

  EnsembleSpec spec{it->second, j};
  switch (spec.type) {
    case EnsembleType::kStochastic:
      diag.check_keys(j, {"type", "atoms"}, "stochastic ensemble");
      if (!j.contains("atoms")) diag.fail("ensemble", "stochastic ensemble needs \"atoms\"");
      check_atoms(diag, j.at("atoms"), {"matrix", "weight"}, true, false);
      break;
    case EnsembleType::kDirichlet:
      diag.check_keys(j, {"type", "dim", "alpha"}, "dirichlet ensemble");
      if (!j.contains("dim") || !j.contains("alpha")) diag.fail("ensemble", "dirichlet ensemble needs \"dim\" and \"alpha\"");
      diag.count(j.at("dim"), "dim", 1);
      if (!(diag.number(j.at("alpha"), "alpha") > 0.0)) diag.fail("alpha", "\"alpha\" out of range: must be > 0");
      break;
    case EnsembleType::kMatrix: {
      diag.check_keys(j, {"type", "psi_s", "norm", "atoms"}, "matrix ensemble");
      for (const char* k : {"psi_s", "norm", "atoms"}) {
        if (!j.contains(k)) diag.fail("ensemble", std::string("matrix ensemble needs \"") + k + "\"");
      }
      if (!j.at("psi_s").is_array() || j.at("psi_s").empty()) diag.fail("psi_s", "\"psi_s\" must be a non-empty array");
      const auto& norm = j.at("norm");
      if (!norm.is_string() || (norm != "euclidean" && norm != "max-row-sum" && norm != "reference-induced")) {
        diag.fail("norm", "\"norm\" must be one of euclidean, max-row-sum, reference-induced");
      }
      check_atoms(diag, j.at("atoms"), {"matrix", "weight"}, true, true);
      break;
    }
    case EnsembleType::kSpin: {
      std::set<std::string> allowed = kSpinFields;
      allowed.insert({"type", "atoms"});
      diag.check_keys(j, allowed, "spin ensemble");
      for (const auto& f : kSpinFields) {
        if (j.contains(f)) diag.number(j.at(f), f);
      }
      if (j.contains("atoms")) {
        std::set<std::string> atom_keys = kSpinFields;
        atom_keys.insert("weight");
        check_atoms(diag, j.at("atoms"), atom_keys, false, false);
      }
      break;
    }
    case EnsembleType::kSpinUniformTau: {
      std::set<std::string> allowed = {"type", "e_s", "e_e", "beta", "lambda", "tau_min", "tau_max"};
      diag.check_keys(j, allowed, "spin-uniform-tau ensemble");
      for (const auto& f : allowed) {
        if (f != "type" && j.contains(f)) diag.number(j.at(f), f);
      }
      if (!j.contains("tau_min") || !j.contains("tau_max")) {
        diag.fail("ensemble", "spin-uniform-tau ensemble needs \"tau_min\" and \"tau_max\"");
      }
      break;
    }
  }
  return spec;
}

void check_compatible(const Diagnostics& diag, Experiment e, const EnsembleSpec& s) {
  const auto need = [&](std::initializer_list<EnsembleType> ok, const char* what) {
    for (auto t : ok) {
      if (t == s.type) return;
    }
    diag.fail("type", to_string(e) + " experiment needs " + what);
  };
  switch (e) {
    case Experiment::kMarkov:
      need({EnsembleType::kStochastic, EnsembleType::kDirichlet}, "a stochastic or dirichlet ensemble");
      break;
    case Experiment::kSpinTau:
      need({EnsembleType::kSpin, EnsembleType::kSpinUniformTau}, "a spin or spin-uniform-tau ensemble");
      break;
    case Experiment::kSpinEnergy:
    case Experiment::kFactorization:
      need({EnsembleType::kSpin}, "a spin ensemble");
      break;
    default:
      break;
  }
}

std::uint64_t min_steps(Experiment e) {
  switch (e) {
    case Experiment::kDecay:
    case Experiment::kSpinTau:
      return 4;
    case Experiment::kForwardLimit:
      return 8;
    case Experiment::kLyapunov:
      return 100;
    default:
      return 1;
  }
}

spin::SpinParams read_spin(const json& j, spin::SpinParams p) {
  if (j.contains("e_s")) p.e_s = j.at("e_s").get<double>();
  if (j.contains("e_e")) p.e_e = j.at("e_e").get<double>();
  if (j.contains("beta")) p.beta = j.at("beta").get<double>();
  if (j.contains("lambda")) p.lambda = j.at("lambda").get<double>();
  if (j.contains("tau")) p.tau = j.at("tau").get<double>();
  return p;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::kDecay: return "decay";
    case Experiment::kCesaro: return "cesaro";
    case Experiment::kForwardLimit: return "forward-limit";
    case Experiment::kLyapunov: return "lyapunov";
    case Experiment::kMarkov: return "markov";
    case Experiment::kSpinTau: return "spin-tau";
    case Experiment::kSpinEnergy: return "spin-energy";
    case Experiment::kFactorization: return "factorization";
  }
  return "?";
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> kNames = {"decay",  "cesaro",   "forward-limit", "lyapunov",
                                                  "markov", "spin-tau", "spin-energy",   "factorization"};
  return kNames;
}

Experiment parse_experiment(const std::string& name) {
  for (int i = 0; i < 8; ++i) {
    const auto e = static_cast<Experiment>(i);
    if (to_string(e) == name) return e;
  }
  throw Error(ErrorKind::kUsage, "unknown experiment \"" + name + "\"");
}

std::map<std::string, double> default_tolerances(Experiment e) {
  switch (e) {
    case Experiment::kDecay: return {{"r2_min", 0.9}, {"alpha_rel", 0.05}};
    case Experiment::kCesaro: return {{"band_factor", 5.0}, {"crosscheck", 1e-8}};
    case Experiment::kForwardLimit: return {{"converge", 1e-10}, {"identity", 1e-8}};
    case Experiment::kLyapunov: return {{"top", 1e-3}, {"gap_factor", 0.5}};
    case Experiment::kMarkov: return {{"sv2", 1e-10}, {"rows", 1e-9}, {"se_factor", 3.0}};
    case Experiment::kSpinTau: return {{"gibbs", 1e-6}, {"r2_min", 0.95}};
    case Experiment::kSpinEnergy: return {{"band_factor", 5.0}, {"offset", 1e-3}, {"constant_beta", 1e-10}};
    case Experiment::kFactorization: return {{"residual", 1e-10}, {"kernel", 1e-12}, {"intertwining", 1e-10}};
  }
  return {};
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = to_string(experiment);
  j["ensemble"] = ensemble.json;
  j["steps"] = steps;
  j["trajectories"] = trajectories;
  j["seed"] = seed;
  j["tolerances"] = tolerances;
  j["output_dir"] = output_dir;
  return j;
}

ExperimentConfig parse_config(const std::string& text) {
  const Diagnostics diag(text);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const Location loc = location_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
    std::ostringstream os;
    os << "line " << loc.line << ", column " << loc.column << ": malformed JSON (" << e.what() << ")";
    throw Error(ErrorKind::kUsage, os.str());
  }
  diag.require_object(j, "", "config");
  diag.check_keys(j, {"experiment", "ensemble", "steps", "trajectories", "seed", "tolerances", "output_dir"},
                  "config");
  for (const char* k : {"experiment", "ensemble", "steps"}) {
    if (!j.contains(k)) diag.fail("", std::string("config is missing required key \"") + k + "\"");
  }

  ExperimentConfig c;
  if (!j.at("experiment").is_string()) diag.fail("experiment", "\"experiment\" must be a string");
  try {
    c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  } catch (const Error& e) {
    diag.fail("experiment", e.what());
  }
  c.ensemble = parse_ensemble(diag, j.at("ensemble"));
  check_compatible(diag, c.experiment, c.ensemble);
  c.steps = diag.count(j.at("steps"), "steps", min_steps(c.experiment));
  if (j.contains("trajectories")) c.trajectories = diag.count(j.at("trajectories"), "trajectories", 1);
  if (j.contains("seed")) c.seed = diag.count(j.at("seed"), "seed", 0);
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) diag.fail("output_dir", "\"output_dir\" must be a string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  c.tolerances = default_tolerances(c.experiment);
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    diag.require_object(t, "tolerances", "\"tolerances\"");
    for (const auto& [k, v] : t.items()) {
      if (!c.tolerances.count(k)) {
        diag.fail(k, "unknown tolerance \"" + k + "\" for " + to_string(c.experiment));
      }
      const double x = diag.number(v, k);
      if (!(x >= 0.0)) diag.fail(k, "tolerance \"" + k + "\" out of range: must be >= 0");
      c.tolerances[k] = x;
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kUsage, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

spin::SpinParams spin_base(const EnsembleSpec& spec) { return read_spin(spec.json, spin::SpinParams{}); }

std::vector<std::pair<spin::SpinParams, double>> spin_atoms(const EnsembleSpec& spec) {
  const spin::SpinParams base = spin_base(spec);
  std::vector<std::pair<spin::SpinParams, double>> out;
  if (!spec.json.contains("atoms")) {
    out.emplace_back(base, 1.0);
    return out;
  }
  for (const auto& a : spec.json.at("atoms")) out.emplace_back(read_spin(a, base), a.at("weight").get<double>());
  return out;
}

}  // namespace rrdo::lab
