#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rrdo/ensemble.hpp"

namespace rrdo {

/// Floor for log-norms of products that underflow to exactly zero.
constexpr double kLogNormFloor = -745.0;

/// One realization of the forward product Psi_n = M_1...M_n, the reverse
/// product Phi_n = M_n...M_1 and the vectors theta_n, eta_n with
///   Psi_n = |psi_s><theta_n| + M_Q1...M_Qn,
///   Phi_n = |psi_s><eta_n|   + M_Qn...M_Q1.
///
/// The forward M_Q product is kept as a unit-norm matrix times exp(log
/// scale) so that its log-norm survives underflow. The trajectory holds a
/// reference to the ensemble, which must outlive it.
class ProductTrajectory {
 public:
  ProductTrajectory(const MatrixEnsemble& ensemble, RngStream rng);

  /// Draw M(omega_{n+1}) and advance every process by one factor.
  void step();
  void advance(std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) step();
  }

  std::size_t n_steps() const noexcept { return n_; }
  const ComplexMatrix& psi_n() const noexcept { return psi_; }
  const ComplexMatrix& phi_n() const noexcept { return phi_; }
  const ComplexVector& theta_n() const noexcept { return theta_; }
  const ComplexVector& eta_n() const noexcept { return eta_; }
  /// log ||M_Q(omega_1)...M_Q(omega_k)|| for k = 1..n.
  const std::vector<double>& mq_product_norm_log() const noexcept { return log_norms_; }
  /// Running max of ||Psi_k|| and ||Phi_k||.
  double c0_observed() const noexcept { return c0_; }
  /// ||eta_n - eta_{n-1}|| of the last step (0 after the first).
  double last_eta_increment() const noexcept { return eta_increment_; }
  bool exact_annihilation() const noexcept { return annihilated_; }
  const RngStream& rng() const noexcept { return rng_; }
  const MatrixEnsemble& ensemble() const noexcept { return *ensemble_; }
  const AtomPtr& last_atom() const noexcept { return last_; }

  /// M_Q(omega_1)...M_Q(omega_n), rescaled to absolute size (may underflow).
  ComplexMatrix mq_forward_product() const;
  /// M_Q(omega_n)...M_Q(omega_1).
  const ComplexMatrix& mq_reverse_product() const noexcept { return reverse_mq_; }

 private:
  const MatrixEnsemble* ensemble_;
  RngStream rng_;
  std::size_t n_ = 0;
  ComplexMatrix psi_;
  ComplexMatrix phi_;
  ComplexVector theta_;
  ComplexVector eta_;
  ComplexMatrix forward_mq_unit_;
  double forward_mq_log_scale_ = 0.0;
  ComplexMatrix reverse_mq_;
  std::vector<double> log_norms_;
  double c0_ = 1.0;
  double eta_increment_ = 0.0;
  bool annihilated_ = false;
  AtomPtr last_;
};

/// ||Psi_n - |psi_s><theta_n| - M_Q1...M_Qn||. Requires n >= 1.
double check_decomposition(const ProductTrajectory& t);

/// Neumaier-compensated running sum of complex matrices.
class CompensatedSum {
 public:
  CompensatedSum(Eigen::Index rows, Eigen::Index cols);
  void add(const ComplexMatrix& x);
  ComplexMatrix total() const { return sum_ + comp_; }

 private:
  ComplexMatrix sum_;
  ComplexMatrix comp_;
};

enum class CesaroTarget { kTheta, kPsiProduct };

struct CesaroAverage {
  CesaroTarget target;
  std::size_t n = 0;
  /// d x 1 for kTheta, d x d for kPsiProduct.
  ComplexMatrix value;
  /// Batch-means standard error per entry (modulus of the complex error).
  Eigen::MatrixXd batch_std_error;
};

/// (1/N) sum_{n=1}^N theta_n or Psi_n along one fresh trajectory.
CesaroAverage cesaro(const MatrixEnsemble& ensemble, RngStream rng, std::size_t n,
                     CesaroTarget target, std::size_t batches = 32);

struct DecayFit {
  /// Fitted rate; present only when r_squared >= 0.9 (or the product was
  /// annihilated exactly).
  std::optional<double> alpha_hat;
  double slope = 0.0;
  /// Envelope constant: log_norm(k) <= ln(c_hat) - slope_rate * k on the window.
  double c_hat = 0.0;
  std::size_t onset_n0 = 0;
  double r_squared = 0.0;
  bool exact_annihilation = false;
};

/// Least-squares line through (k, log ||M_Q1...M_Qk||) over the trailing
/// `window` points. Requires at least 2 * window points.
DecayFit decay_fit(const std::vector<double>& log_norms, std::size_t window);
DecayFit decay_fit(const ProductTrajectory& t, std::size_t window);

struct ForwardLimit {
  bool converged = false;
  /// sup over the trailing quarter of ||Psi_n - Psi_N||.
  double trailing_sup = 0.0;
  /// Psi_N when converged.
  std::optional<ComplexMatrix> limit;
  /// |psi_s><psi| when psi(omega) is the same for every atom.
  std::optional<ComplexMatrix> rank_one_limit;
  DecayFit decay;
};

/// Runs N steps and tests whether Psi_n settles. Throws kHypothesisViolated
/// when the M_Q product does not decay.
ForwardLimit forward_limit(const MatrixEnsemble& ensemble, RngStream rng, std::size_t n,
                           double tol);

/// Steps `t` until 10 consecutive eta increments are <= tol and returns
/// eta_n. Throws kNotConverged once n_steps reaches max_steps.
ComplexVector eta_infinity(ProductTrajectory& t, double tol, std::size_t max_steps);

struct LyapunovReport {
  /// Descending; -inf for directions annihilated exactly.
  std::vector<double> exponents;
  /// exponents[0] - exponents[1] (0 in dimension 1).
  double top_multiplicity_gap = 0.0;
};

/// Lyapunov spectrum of Psi_n via QR re-orthonormalization of the adjoint
/// product M_n^*...M_1^* every `reorthonormalize_every` steps.
LyapunovReport lyapunov(const MatrixEnsemble& ensemble, std::size_t n, RngStream rng,
                        std::size_t reorthonormalize_every = 1);

}  // namespace rrdo
