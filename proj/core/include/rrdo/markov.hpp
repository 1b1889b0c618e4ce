#pragma once

#include <utility>
#include <vector>

#include "rrdo/ensemble.hpp"
#include "rrdo/products.hpp"

namespace rrdo::markov {

/// Row-stochastic matrix. Rows are renormalized to sum to 1 on construction;
/// tiny negative round-off (>= -1e-12) is clipped to zero.
class StochasticMatrix {
 public:
  /// Throws kInvalidInput for non-square input, negative entries or rows
  /// whose sum differs from 1 by more than 1e-6.
  explicit StochasticMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  Eigen::Index dim() const noexcept { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
};

/// psi_s = (1, ..., 1) / sqrt(d).
ComplexVector uniform_reference(Eigen::Index d);

/// RRDO with psi_s = uniform_reference(d) and the max-row-sum norm.
Rrdo as_rrdo(const StochasticMatrix& m);

constexpr double kDefaultPositivityEps = 1e-9;

/// True iff every entry is >= eps.
bool positive_entries(const StochasticMatrix& m, double eps = kDefaultPositivityEps);

MatrixEnsemble finite_ensemble(const std::vector<std::pair<StochasticMatrix, double>>& atoms);

/// Rows iid Dirichlet(alpha, ..., alpha).
MatrixEnsemble dirichlet_ensemble(Eigen::Index d, double alpha);

/// One Dirichlet(alpha) row-stochastic draw.
StochasticMatrix sample_dirichlet(Eigen::Index d, double alpha, RngStream& rng);

struct ChainResult {
  ComplexMatrix phi_n;
  /// Mean of the rows of Phi_n (real part).
  Eigen::VectorXd limiting_row;
  ComplexVector eta_inf;
  /// Second singular value of Phi_n.
  double rank_one_residual = 0.0;
  /// Largest Euclidean distance between two rows of Phi_n.
  double row_spread = 0.0;
  /// Per-step second singular value and row mean, when recorded.
  std::vector<double> rank_one_history;
  std::vector<Eigen::VectorXd> limiting_row_history;
};

struct ChainOptions {
  double eta_tol = 1e-12;
  /// eta_infinity keeps stepping the same trajectory up to this many steps.
  std::size_t eta_max_steps = 100000;
  double positivity_eps = kDefaultPositivityEps;
  bool record_history = false;
};

/// Largest Euclidean distance between two rows.
double row_spread(const Eigen::MatrixXd& m);

/// Runs the reverse product Phi_n = M_n...M_1 for n steps. Throws
/// kHypothesisViolated when no positive-entry matrix has positive
/// probability (finite ensembles) or is seen in 64 probe draws (parametric).
ChainResult run_chain(const MatrixEnsemble& ensemble, std::size_t n, RngStream rng,
                      const ChainOptions& options = {});

}  // namespace rrdo::markov
