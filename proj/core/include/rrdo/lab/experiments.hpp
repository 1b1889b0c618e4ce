#pragma once

#include <optional>

#include "rrdo/ensemble.hpp"
#include "rrdo/lab/config.hpp"
#include "rrdo/lab/report.hpp"
#include "rrdo/spin.hpp"

namespace rrdo::lab {

/// --threads, then RRDO_LAB_THREADS, then hardware concurrency.
unsigned resolve_threads(std::optional<unsigned> flag);

/// Errors are rethrown with kind kUsage: an ensemble that cannot be built is
/// an invalid config.
MatrixEnsemble build_ensemble(const EnsembleSpec& spec);

/// Each of e_s, e_e, beta, lambda, tau scaled by an independent U[0.5, 1.5].
spin::SpinParams perturbed_spin_params(const spin::SpinParams& base, RngStream& rng);

/// Trajectory i always uses RngStream(seed, i); results merge in index order.
RunReport run(const ExperimentConfig& config, unsigned threads);

}  // namespace rrdo::lab
