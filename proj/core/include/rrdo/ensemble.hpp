#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rrdo/error.hpp"
#include "rrdo/rng.hpp"
#include "rrdo/rrdo.hpp"

namespace rrdo {

/// One realization M(omega) together with its decomposition.
struct Atom {
  Rrdo rrdo;
  RrdoDecomposition decomposition;
  /// Index into the atom list for finite ensembles, -1 for parametric draws.
  long index = -1;
};

using AtomPtr = std::shared_ptr<const Atom>;

/// Raised when a parametric generator yields an operator that fails
/// validation.
class SampleRejected : public Error {
 public:
  explicit SampleRejected(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

struct WeightedRrdo {
  Rrdo rrdo;
  double weight;
};

struct MeanEstimate {
  ComplexMatrix mean;
  /// Entrywise standard error of the real and imaginary parts combined
  /// (zero for finite ensembles).
  Eigen::MatrixXd std_error;
  std::size_t samples = 0;
};

struct ThetaLimit {
  ComplexVector theta;
  ComplexMatrix mean_matrix;
  bool mean_in_me = false;
  /// ||(1 - E[M_Q]^*)^-1 E[psi] - theta||; finite ensembles only.
  std::optional<double> residual_crosscheck;
};

/// iid law of M(omega): either a finite list of weighted atoms or a seeded
/// generator. Immutable once built; safe to share across threads.
class MatrixEnsemble {
 public:
  using Generator = std::function<Rrdo(RngStream&)>;

  enum class Support { kFiniteDiscrete, kParametric };

  /// Weights must be non-negative, sum to 1 within 1e-12, and every atom
  /// must carry the same psi_s. Atoms are decomposed once, here.
  static MatrixEnsemble finite(std::vector<WeightedRrdo> atoms, double tol = kDefaultClusterTol);

  /// `generator_id` is descriptive ("stochastic-dirichlet(alpha=1)", ...).
  /// Draws are validated with `validation_probes` random probes.
  static MatrixEnsemble parametric(std::string generator_id, Generator generator,
                                   ComplexVector psi_s, NormDescriptor norm,
                                   double tol = kDefaultClusterTol, int validation_probes = 4);

  Support support() const noexcept { return support_; }
  const std::string& generator_id() const noexcept { return generator_id_; }
  const ComplexVector& psi_s() const noexcept { return psi_s_; }
  const NormDescriptor& norm() const noexcept { return norm_; }
  Eigen::Index dim() const noexcept { return psi_s_.size(); }
  double cluster_tol() const noexcept { return tol_; }

  /// Finite ensembles only.
  const std::vector<AtomPtr>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Draw M(omega) and its decomposition. Finite: one uniform, inverse CDF.
  AtomPtr draw(RngStream& rng) const;
  Rrdo sample(RngStream& rng) const { return draw(rng)->rrdo; }

  /// Exact for finite ensembles; Monte Carlo over `samples` draws otherwise.
  MeanEstimate mean_matrix_estimate(std::size_t samples = 100000,
                                    std::uint64_t seed = 0x6d65616eULL) const;
  ComplexMatrix mean_matrix() const { return mean_matrix_estimate().mean; }

  /// theta = P_{1,E[M]}^* psi_s. Throws kMeanNotInME if the eigenvalue-1
  /// cluster of E[M] is not simple.
  ThetaLimit theta_limit(double tol = kDefaultClusterTol) const;

  /// True when every atom has the same psi(omega) (finite ensembles).
  bool constant_psi(double tol = 1e-10) const;

 private:
  MatrixEnsemble() = default;

  Support support_ = Support::kFiniteDiscrete;
  std::string generator_id_;
  ComplexVector psi_s_;
  NormDescriptor norm_ = NormDescriptor::euclidean();
  double tol_ = kDefaultClusterTol;
  int validation_probes_ = 4;
  std::vector<AtomPtr> atoms_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
  std::shared_ptr<const Generator> generator_;
};

}  // namespace rrdo
