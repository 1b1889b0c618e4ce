#include "rrdo/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rrdo {

namespace {

std::string describe(const ValidationReport& report) {
  std::ostringstream os;
  os << "generator produced a non-RRDO:";
  for (const auto& v : report.violations) os << " [" << v << "]";
  return os.str();
}

}  // namespace

SampleRejected::SampleRejected(ValidationReport report)
    : Error(ErrorKind::kSampleRejected, describe(report)), report_(std::move(report)) {}

MatrixEnsemble MatrixEnsemble::finite(std::vector<WeightedRrdo> atoms, double tol) {
  if (atoms.empty()) throw Error(ErrorKind::kInvalidInput, "ensemble needs at least one atom");
  MatrixEnsemble e;
  e.support_ = Support::kFiniteDiscrete;
  e.generator_id_ = "finite-discrete";
  e.tol_ = tol;
  e.psi_s_ = atoms.front().rrdo.psi_s;
  e.norm_ = atoms.front().rrdo.norm;

  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
      throw Error(ErrorKind::kInvalidInput, "atom weights must be non-negative");
    }
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "atom weights sum to " << total << ", not 1";
    throw Error(ErrorKind::kInvalidInput, os.str());
  }

  double running = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    auto& a = atoms[k];
    if (a.rrdo.dim() != e.dim() || a.rrdo.psi_s != e.psi_s_) {
      throw Error(ErrorKind::kInvalidInput, "all atoms must share the same psi_s");
    }
    if (a.rrdo.norm.kind() != e.norm_.kind()) {
      throw Error(ErrorKind::kInvalidInput, "all atoms must share the same norm descriptor");
    }
    auto dec = decompose(a.rrdo, tol);
    e.atoms_.push_back(std::make_shared<const Atom>(
        Atom{std::move(a.rrdo), std::move(dec), static_cast<long>(k)}));
    e.weights_.push_back(a.weight);
    running += a.weight;
    e.cdf_.push_back(running);
  }
  // The last positive-weight bucket absorbs rounding.
  std::size_t last = e.weights_.size() - 1;
  while (last > 0 && e.weights_[last] == 0.0) --last;
  std::fill(e.cdf_.begin() + static_cast<long>(last), e.cdf_.end(), 1.0);
  return e;
}

MatrixEnsemble MatrixEnsemble::parametric(std::string generator_id, Generator generator,
                                          ComplexVector psi_s, NormDescriptor norm, double tol,
                                          int validation_probes) {
  if (!generator) throw Error(ErrorKind::kInvalidInput, "parametric ensemble needs a generator");
  MatrixEnsemble e;
  e.support_ = Support::kParametric;
  e.generator_id_ = std::move(generator_id);
  const double len = psi_s.norm();
  if (len == 0.0) throw Error(ErrorKind::kInvalidInput, "psi_s must be nonzero");
  e.psi_s_ = psi_s / len;
  e.norm_ = std::move(norm);
  e.tol_ = tol;
  e.validation_probes_ = validation_probes;
  e.generator_ = std::make_shared<const Generator>(std::move(generator));
  return e;
}

AtomPtr MatrixEnsemble::draw(RngStream& rng) const {
  if (support_ == Support::kFiniteDiscrete) {
    if (atoms_.size() == 1) return atoms_.front();
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    auto k = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
    if (k >= atoms_.size()) k = atoms_.size() - 1;
    return atoms_[k];
  }
  Rrdo r = (*generator_)(rng);
  if (r.dim() != dim() || (r.psi_s - psi_s_).norm() > 1e-12) {
    ValidationReport rep;
    rep.violations.push_back("generator changed psi_s");
    throw SampleRejected(std::move(rep));
  }
  auto rep = validate_rrdo(r, validation_probes_, rng.counter());
  if (!rep.passed()) throw SampleRejected(std::move(rep));
  auto dec = decompose(r, tol_);
  return std::make_shared<const Atom>(Atom{std::move(r), std::move(dec), -1});
}

MeanEstimate MatrixEnsemble::mean_matrix_estimate(std::size_t samples, std::uint64_t seed) const {
  const Eigen::Index d = dim();
  MeanEstimate out;
  if (support_ == Support::kFiniteDiscrete) {
    out.mean = ComplexMatrix::Zero(d, d);
    for (std::size_t k = 0; k < atoms_.size(); ++k) out.mean += weights_[k] * atoms_[k]->rrdo.matrix;
    out.std_error = Eigen::MatrixXd::Zero(d, d);
    out.samples = atoms_.size();
    return out;
  }
  if (samples < 2) throw Error(ErrorKind::kInvalidInput, "Monte Carlo mean needs >= 2 samples");
  RngStream rng(seed, 0);
  ComplexMatrix mean = ComplexMatrix::Zero(d, d);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t n = 1; n <= samples; ++n) {
    const ComplexMatrix x = (*generator_)(rng).matrix;
    const ComplexMatrix delta = x - mean;
    mean += delta / static_cast<double>(n);
    const ComplexMatrix delta2 = x - mean;
    m2 += (delta.conjugate().cwiseProduct(delta2)).real();
  }
  out.mean = mean;
  out.std_error = (m2 / static_cast<double>(samples - 1) / static_cast<double>(samples)).cwiseSqrt();
  out.samples = samples;
  return out;
}

ThetaLimit MatrixEnsemble::theta_limit(double tol) const {
  ThetaLimit out;
  out.mean_matrix = mean_matrix();
  const auto p1 = linalg::riesz_projector(out.mean_matrix, Complex(1.0, 0.0), tol);
  if (p1.cluster_dim != 1) {
    std::ostringstream os;
    os << "eigenvalue-1 cluster of E[M] has dimension " << p1.cluster_dim;
    throw Error(ErrorKind::kMeanNotInME, os.str());
  }
  out.theta = p1.projector.adjoint() * psi_s_;
  Rrdo mean_rrdo(out.mean_matrix, psi_s_, norm_);
  out.mean_in_me = decompose(mean_rrdo, tol).in_me;

  if (support_ == Support::kFiniteDiscrete) {
    const Eigen::Index d = dim();
    ComplexMatrix mean_mq = ComplexMatrix::Zero(d, d);
    ComplexVector mean_psi = ComplexVector::Zero(d);
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      mean_mq += weights_[k] * atoms_[k]->decomposition.m_q;
      mean_psi += weights_[k] * atoms_[k]->decomposition.psi;
    }
    const ComplexMatrix lhs = ComplexMatrix::Identity(d, d) - mean_mq.adjoint();
    const ComplexVector via_mq = lhs.partialPivLu().solve(mean_psi);
    out.residual_crosscheck = (via_mq - out.theta).norm();
  }
  return out;
}

bool MatrixEnsemble::constant_psi(double tol) const {
  if (support_ != Support::kFiniteDiscrete) return false;
  const ComplexVector* first = nullptr;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (weights_[k] <= 0.0) continue;
    const auto& psi = atoms_[k]->decomposition.psi;
    if (!first) {
      first = &psi;
    } else if ((psi - *first).norm() > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace rrdo
