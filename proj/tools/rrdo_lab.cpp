// rrdo-lab <experiment> --config <file> [--seed N] [--out DIR] [--threads N]
//
// Exit codes: 0 every verdict passed, 1 a verdict failed or the run hit a
// numerical failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "rrdo/lab/experiments.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded experiments on products of random reduced dynamics operators"};
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;

  app.add_option("experiment", experiment, "decay | cesaro | forward-limit | lyapunov | markov | spin-tau | "
                                           "spin-energy | factorization")
      ->required();
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--out", out_dir, "overrides the config output_dir");
  app.add_option("--threads", threads, "worker threads (fallback: RRDO_LAB_THREADS, then all cores)")
      ->check(CLI::Range(1u, 4096u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  rrdo::lab::ExperimentConfig config;
  try {
    const auto wanted = rrdo::lab::parse_experiment(experiment);
    config = rrdo::lab::load_config(config_path);
    if (config.experiment != wanted) {
      std::cerr << "error: command line asks for " << experiment << " but " << config_path << " configures "
                << rrdo::lab::to_string(config.experiment) << '\n';
      return kExitUsage;
    }
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
  } catch (const rrdo::Error& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return kExitUsage;
  }

  const unsigned n_threads = rrdo::lab::resolve_threads(threads);
  try {
    const rrdo::lab::RunReport report = rrdo::lab::run(config, n_threads);
    rrdo::lab::write_outputs(report, config.output_dir);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::size_t failed = 0;
    for (const auto& v : report.verdicts) {
      if (!v.passed) {
        ++failed;
        std::cerr << "FAIL " << v.name << ": " << v.measured << ' ' << v.relation << ' ' << v.threshold
                  << (v.detail.empty() ? "" : " (" + v.detail + ")") << '\n';
      }
    }
    std::cout << rrdo::lab::to_string(config.experiment) << ": " << report.verdicts.size() - failed << '/'
              << report.verdicts.size() << " verdicts passed; wrote " << config.output_dir << '\n';
    return failed == 0 ? kExitPass : kExitFail;
  } catch (const rrdo::Error& e) {
    if (e.kind() == rrdo::ErrorKind::kUsage) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    std::cerr << "error: " << e.what() << '\n';
    try {
      rrdo::lab::write_summary(rrdo::lab::error_summary(config, std::string(rrdo::to_string(e.kind())), e.what()),
                               config.output_dir);
    } catch (const std::exception& w) {
      std::cerr << "error: could not write summary: " << w.what() << '\n';
    }
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
