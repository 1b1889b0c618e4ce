#include "rrdo/spin.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace rrdo::spin {

namespace {

const Complex kI(0.0, 1.0);

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

ComplexMatrix lowering() {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  return a;
}

ComplexMatrix kron4(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c,
                    const ComplexMatrix& d) {
  return linalg::kron(linalg::kron(linalg::kron(a, b), c), d);
}

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Liouvillean h (x) 1 - 1 (x) conj(h).
ComplexMatrix liouvillean(const ComplexMatrix& h) {
  return linalg::kron(h, identity(2)) - linalg::kron(identity(2), h.conjugate());
}

ModularFactor modular_factor(double p1, double p2) {
  ModularFactor f;
  f.omega = ComplexVector::Zero(4);
  f.omega(0) = std::sqrt(p1);
  f.omega(3) = std::sqrt(p2);
  const double p[2] = {p1, p2};
  f.delta.resize(4);
  f.swap = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      f.delta(i * 2 + j) = p[i] / p[j];
      f.swap(j * 2 + i, i * 2 + j) = 1.0;
    }
  }
  return f;
}

double root_s(const SpinParams& p) {
  const double de = p.e_s - p.e_e;
  return std::sqrt(de * de + 4.0 * p.lambda * p.lambda);
}

void require_root(const SpinParams& p, const char* what) {
  if (root_s(p) == 0.0) {
    throw Error(ErrorKind::kUndefined, std::string(what) + ": E_S = E_E and lambda = 0");
  }
}

}  // namespace

SpinParams sanitize(const SpinParams& p, std::vector<std::string>* warnings) {
  const auto bad = [](const char* what) {
    throw Error(ErrorKind::kInvalidInput, std::string("spin parameters: ") + what);
  };
  if (std::isinf(p.beta) && p.beta > 0) {
    throw Error(ErrorKind::kUnsupportedParameter, "beta = inf makes psi_e non-separating");
  }
  if (!std::isfinite(p.e_s) || !std::isfinite(p.e_e) || !std::isfinite(p.beta) ||
      !std::isfinite(p.lambda) || !std::isfinite(p.tau)) {
    bad("non-finite value");
  }
  if (!(p.e_s > 0.0)) bad("e_s must be positive");
  if (!(p.e_e > 0.0)) bad("e_e must be positive");
  if (p.beta < 0.0) bad("beta must be non-negative");
  if (!(p.tau > 0.0)) bad("tau must be positive");
  SpinParams out = p;
  if (out.beta > kMaxBeta) {
    std::ostringstream os;
    os << "beta = " << p.beta << " capped at " << kMaxBeta;
    if (warnings) {
      warnings->push_back(os.str());
    } else {
      std::cerr << "warning: " << os.str() << '\n';
    }
    out.beta = kMaxBeta;
  }
  return out;
}

ComplexVector GnsModel::reference() const { return linalg::kron(psi_s, psi_e); }

ComplexMatrix GnsModel::conjugate_by_j(const ComplexMatrix& x) const {
  const ComplexMatrix s = j_swap.cast<Complex>();
  return s * x.conjugate() * s.transpose();
}

GnsModel build_gns(const SpinParams& params) {
  GnsModel g;
  g.params = sanitize(params, &g.warnings);
  const SpinParams& p = g.params;

  g.h_s = diag2(0.0, p.e_s);
  g.h_e = diag2(0.0, p.e_e);
  g.liouville_s = liouvillean(g.h_s);
  g.liouville_e = liouvillean(g.h_e);

  const double boltz = std::exp(-p.beta * p.e_e);
  const double z_e = 1.0 + boltz;
  if (!(boltz > 0.0)) {
    throw Error(ErrorKind::kUnsupportedParameter, "Delta_E is singular at this beta * e_e");
  }
  g.modular_s = modular_factor(0.5, 0.5);
  g.modular_e = modular_factor(1.0 / z_e, boltz / z_e);
  g.psi_s = g.modular_s.omega;
  g.psi_e = g.modular_e.omega;

  g.j_swap = linalg::kron(g.modular_s.swap.cast<Complex>(), g.modular_e.swap.cast<Complex>()).real();
  g.delta = linalg::kron(g.modular_s.delta.cast<Complex>(), g.modular_e.delta.cast<Complex>()).real();

  const ComplexMatrix a = lowering();
  const ComplexMatrix ad = a.adjoint();
  const ComplexMatrix one = identity(2);
  g.v_rep = p.lambda * (kron4(a, one, ad, one) + kron4(ad, one, a, one));

  const Eigen::VectorXd dh = g.delta.cwiseSqrt();
  const ComplexMatrix twisted = dh.cast<Complex>().asDiagonal() * g.v_rep *
                                dh.cwiseInverse().cast<Complex>().asDiagonal();
  const ComplexMatrix free = linalg::kron(g.liouville_s, identity(4)) +
                             linalg::kron(identity(4), g.liouville_e);
  g.k_gen = p.tau * (free + g.v_rep - g.conjugate_by_j(twisted));
  g.p_proj = linalg::kron(identity(4), linalg::outer(g.psi_e, g.psi_e));
  return g;
}

ComplexMatrix reduced_dynamics(const GnsModel& g) {
  const ComplexMatrix u = linalg::matrix_exp(kI * g.k_gen);
  const ComplexMatrix b = linalg::kron(identity(4), g.psi_e);
  return b.adjoint() * u * b;
}

Rrdo build_m(const SpinParams& p) {
  const GnsModel g = build_gns(p);
  return Rrdo(reduced_dynamics(g), g.psi_s, NormDescriptor::reference_induced(g.psi_s));
}

double resonance_period(const SpinParams& p) {
  require_root(p, "resonance_period");
  return 2.0 * std::numbers::pi / root_s(p);
}

double resonance_distance(const SpinParams& p) {
  const double t = resonance_period(p);
  const double k = std::round(p.tau / t);
  return std::abs(p.tau - k * t);
}

Complex e0(const SpinParams& p) {
  require_root(p, "e0");
  // ((d - s)^2 + 4 l^2 e^{i tau s}) / ((d - s)^2 + 4 l^2) with the common
  // factor (s - d) cancelled; finite at lambda = 0, E_S > E_E.
  const double s = root_s(p);
  const double d = p.e_s - p.e_e;
  return ((s - d) + (s + d) * std::exp(kI * (p.tau * s))) / (2.0 * s);
}

Complex coherence_eigenvalue(const SpinParams& p) {
  const double s = root_s(p);
  return e0(p) * std::exp(-kI * (p.tau * (s - p.e_s - p.e_e) / 2.0));
}

double population_eigenvalue(const SpinParams& p) {
  require_root(p, "population_eigenvalue");
  const double s = root_s(p);
  const double sn = std::sin(s * p.tau / 2.0);
  return 1.0 - 4.0 * p.lambda * p.lambda / (s * s) * sn * sn;
}

LimitState gibbs_limit(const SpinParams& p) {
  LimitState out;
  out.beta_prime = p.e_e / p.e_s * p.beta;
  const double w = std::exp(-out.beta_prime * p.e_s);
  const double z = 1.0 + w;
  const ComplexVector psi_s = modular_factor(0.5, 0.5).omega;
  out.target_vector = (2.0 / z) * (linalg::kron(diag2(1.0, w), identity(2)) * psi_s);
  out.target_projector = linalg::outer(psi_s, out.target_vector);
  return out;
}

Complex expectation(const ComplexVector& state, const ComplexMatrix& a_s) {
  if (state.size() != 4 || a_s.rows() != 2 || a_s.cols() != 2) {
    throw Error(ErrorKind::kInvalidInput, "expectation needs a 4-vector and a 2x2 observable");
  }
  const ComplexVector psi_s = modular_factor(0.5, 0.5).omega;
  return linalg::inner(state, linalg::kron(a_s, identity(2)) * psi_s);
}

Complex gibbs_excited_population(Complex beta, double e_s) {
  const Complex w = std::exp(-beta * e_s);
  return w / (1.0 + w);
}

AsymptoticTemperature asymptotic_temperature(const std::vector<std::pair<SpinParams, double>>& atoms) {
  if (atoms.empty()) throw Error(ErrorKind::kInvalidInput, "asymptotic_temperature: empty ensemble");
  const double e_s = atoms.front().first.e_s;
  double total = 0.0;
  Complex mean_e0 = 0.0;
  Complex mean_weighted = 0.0;
  for (const auto& [p, w] : atoms) {
    if (p.e_s != e_s) throw Error(ErrorKind::kInvalidInput, "asymptotic_temperature: atoms must share e_s");
    if (w < 0.0) throw Error(ErrorKind::kInvalidInput, "asymptotic_temperature: negative weight");
    const Complex e = e0(p);
    const double bp = p.e_e / p.e_s * p.beta;
    const double z = 1.0 + std::exp(-bp * p.e_s);
    mean_e0 += w * e;
    mean_weighted += w * (1.0 - e) * (1.0 - 2.0 / z);
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::kInvalidInput, "asymptotic_temperature: weights must sum to 1");
  }
  if (std::abs(1.0 - mean_e0) < 1e-14) {
    throw Error(ErrorKind::kHypothesisViolated, "every atom is resonant (mean e0 = 1)");
  }
  AsymptoticTemperature out;
  out.mean_e0 = mean_e0;
  out.bracket_x = mean_weighted / (1.0 - mean_e0);
  const Complex x = out.bracket_x;
  if (!(std::real(1.0 - x) > 0.0) || !(std::real(1.0 + x) > 0.0)) {
    throw Error(ErrorKind::kHypothesisViolated, "bracket leaves (0, 2); no asymptotic temperature");
  }
  out.rho_e = ComplexMatrix::Zero(2, 2);
  out.rho_e(0, 0) = 1.0 - x;
  out.rho_e(1, 1) = 1.0 + x;
  out.beta_tilde = -std::log(2.0 / (1.0 - x) - 1.0) / e_s;
  out.excited_population = (1.0 + x) / 2.0;
  out.gibbs_crosscheck = std::abs(gibbs_excited_population(out.beta_tilde, e_s) - out.excited_population);
  return out;
}

double tomita_residual(const ModularFactor& f, const ComplexMatrix& a) {
  const ComplexMatrix one = identity(2);
  const ComplexVector lhs_in = f.delta.cwiseSqrt().cast<Complex>().asDiagonal() *
                               (linalg::kron(a, one) * f.omega);
  const ComplexVector lhs = f.swap.cast<Complex>() * lhs_in.conjugate();
  const ComplexVector rhs = linalg::kron(ComplexMatrix(a.adjoint()), one) * f.omega;
  return (lhs - rhs).norm();
}

double intertwining_residual(const GnsModel& g, const ComplexMatrix& a_s, const ComplexMatrix& a_e) {
  const ComplexMatrix one = identity(2);
  const ComplexMatrix a = kron4(a_s, one, a_e, one);
  const ComplexMatrix free = linalg::kron(g.liouville_s, identity(4)) +
                             linalg::kron(identity(4), g.liouville_e);
  const ComplexMatrix l = g.params.tau * (free + g.v_rep);
  const ComplexMatrix ul = linalg::matrix_exp(kI * l);
  const ComplexMatrix uli = linalg::matrix_exp(-kI * l);
  const ComplexMatrix uk = linalg::matrix_exp(kI * g.k_gen);
  const ComplexMatrix uki = linalg::matrix_exp(-kI * g.k_gen);
  return linalg::operator_norm(ul * a * uli - uk * a * uki);
}

double factorization_check(const SpinParams& p1, const SpinParams& p2) {
  const GnsModel g1 = build_gns(p1);
  const GnsModel g2 = build_gns(p2);
  // Index (s, e1, e2) -> s*16 + e1*4 + e2.
  const ComplexMatrix k1 = linalg::kron(g1.k_gen, identity(4));
  ComplexMatrix k2 = ComplexMatrix::Zero(64, 64);
  for (int s = 0; s < 4; ++s) {
    for (int e2 = 0; e2 < 4; ++e2) {
      for (int t = 0; t < 4; ++t) {
        for (int f2 = 0; f2 < 4; ++f2) {
          const Complex v = g2.k_gen(s * 4 + e2, t * 4 + f2);
          if (v == Complex(0.0)) continue;
          for (int e1 = 0; e1 < 4; ++e1) k2(s * 16 + e1 * 4 + e2, t * 16 + e1 * 4 + f2) = v;
        }
      }
    }
  }
  const ComplexMatrix p = kron4(identity(4), linalg::outer(g1.psi_e, g1.psi_e),
                                linalg::outer(g2.psi_e, g2.psi_e), identity(1));
  const ComplexMatrix u1 = linalg::matrix_exp(kI * k1);
  const ComplexMatrix u2 = linalg::matrix_exp(kI * k2);
  return linalg::operator_norm(p * u1 * u2 * p - p * u1 * p * u2 * p);
}

MatrixEnsemble finite_ensemble(const std::vector<std::pair<SpinParams, double>>& atoms) {
  std::vector<WeightedRrdo> list;
  list.reserve(atoms.size());
  for (const auto& [p, w] : atoms) list.push_back({build_m(p), w});
  return MatrixEnsemble::finite(std::move(list));
}

MatrixEnsemble uniform_tau_ensemble(const SpinParams& base, double tau_lo, double tau_hi) {
  if (!(tau_lo > 0.0) || !(tau_hi >= tau_lo)) {
    throw Error(ErrorKind::kInvalidInput, "uniform_tau_ensemble: need 0 < tau_lo <= tau_hi");
  }
  std::vector<std::string> ignored;
  const SpinParams checked = sanitize(base, &ignored);
  std::ostringstream id;
  id << "spin(tau~U[" << tau_lo << "," << tau_hi << "])";
  const ComplexVector psi_s = modular_factor(0.5, 0.5).omega;
  return MatrixEnsemble::parametric(
      id.str(),
      [checked, tau_lo, tau_hi](RngStream& rng) {
        SpinParams p = checked;
        p.tau = rng.uniform(tau_lo, tau_hi);
        return build_m(p);
      },
      psi_s, NormDescriptor::reference_induced(psi_s));
}

}  // namespace rrdo::spin
