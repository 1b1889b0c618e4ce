#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rrdo/ensemble.hpp"

// Two-level system coupled to a chain of two-level probes. Every 4-dim GNS
// space is C^2 (x) C^2 ordered (left, right); the 16-dim interaction space is
// ordered (S-left, S-right, E-left, E-right).
namespace rrdo::spin {

struct SpinParams {
  double e_s = 1.0;
  double e_e = 1.0;
  double beta = 1.0;
  double lambda = 0.0;
  double tau = 1.0;
};

constexpr double kMaxBeta = 1e3;

/// Validates and returns a usable copy. beta above kMaxBeta is capped and a
/// warning appended; beta = inf throws kUnsupportedParameter.
SpinParams sanitize(const SpinParams& p, std::vector<std::string>* warnings = nullptr);

/// Modular data of one factor for Omega = sum_i sqrt(p_i) e_i (x) e_i.
struct ModularFactor {
  ComplexVector omega;
  Eigen::VectorXd delta;     // diagonal of rho (x) rho^{-1}
  Eigen::MatrixXd swap;      // permutation part of J; J x = swap * conj(x)
};

struct GnsModel {
  SpinParams params;
  std::vector<std::string> warnings;
  ComplexVector psi_s;
  ComplexVector psi_e;
  ComplexMatrix h_s;
  ComplexMatrix h_e;
  ComplexMatrix liouville_s;
  ComplexMatrix liouville_e;
  ModularFactor modular_s;
  ModularFactor modular_e;
  Eigen::MatrixXd j_swap;    // 16x16
  Eigen::VectorXd delta;     // 16 diagonal entries
  ComplexMatrix v_rep;
  ComplexMatrix k_gen;
  ComplexMatrix p_proj;

  ComplexVector reference() const;
  /// J X J for the total conjugation.
  ComplexMatrix conjugate_by_j(const ComplexMatrix& x) const;
};

GnsModel build_gns(const SpinParams& p);

/// <e_i (x) psi_e, e^{iK} e_j (x) psi_e>.
ComplexMatrix reduced_dynamics(const GnsModel& g);

/// M with psi_s and the reference-induced norm on psi_s.
Rrdo build_m(const SpinParams& p);

/// 2 pi / sqrt((E_S - E_E)^2 + 4 lambda^2); kUndefined when that root is 0.
double resonance_period(const SpinParams& p);

/// Distance from tau to the lattice T Z.
double resonance_distance(const SpinParams& p);

Complex e0(const SpinParams& p);

/// Coherence eigenvalue of the constructed M: e0 * exp(-i tau (s - E_S - E_E) / 2).
Complex coherence_eigenvalue(const SpinParams& p);

/// Population eigenvalue 1 - (4 lambda^2 / s^2) sin^2(s tau / 2).
double population_eigenvalue(const SpinParams& p);

struct LimitState {
  double beta_prime = 0.0;
  ComplexVector target_vector;
  ComplexMatrix target_projector;
};

LimitState gibbs_limit(const SpinParams& p);

/// <state, (a_s (x) 1) psi_s>.
Complex expectation(const ComplexVector& state, const ComplexMatrix& a_s);

/// Excited-level Gibbs population e^{-b E} / (1 + e^{-b E}); complex b allowed.
Complex gibbs_excited_population(Complex beta, double e_s);

struct AsymptoticTemperature {
  Complex beta_tilde;
  /// diag(1 - x, 1 + x); trace 2.
  ComplexMatrix rho_e;
  Complex bracket_x;
  Complex mean_e0;
  /// (1 + x) / 2 = 1/2 Tr(rho_e |phi_2><phi_2|).
  Complex excited_population;
  /// |Gibbs population at beta_tilde - excited_population|.
  double gibbs_crosscheck = 0.0;
};

/// Atoms share e_s; weights must sum to 1. Throws kHypothesisViolated when
/// every atom is resonant or the bracket leaves the physical range.
AsymptoticTemperature asymptotic_temperature(const std::vector<std::pair<SpinParams, double>>& atoms);

double tomita_residual(const ModularFactor& f, const ComplexMatrix& a);

/// || e^{iL} A e^{-iL} - e^{iK} A e^{-iK} || with L = tau (L_S + L_E + V) and
/// A = a_s (x) 1 (x) a_e (x) 1.
double intertwining_residual(const GnsModel& g, const ComplexMatrix& a_s, const ComplexMatrix& a_e);

/// || P e^{iK1} e^{iK2} P - P e^{iK1} P e^{iK2} P || on H_S (x) H_E1 (x) H_E2.
double factorization_check(const SpinParams& p1, const SpinParams& p2);

MatrixEnsemble finite_ensemble(const std::vector<std::pair<SpinParams, double>>& atoms);

/// tau ~ Uniform[tau_lo, tau_hi], other parameters from base.
MatrixEnsemble uniform_tau_ensemble(const SpinParams& base, double tau_lo, double tau_hi);

}  // namespace rrdo::spin
