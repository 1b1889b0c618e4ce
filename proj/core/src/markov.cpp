#include "rrdo/markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rrdo::markov {

StochasticMatrix::StochasticMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw Error(ErrorKind::kInvalidInput, "stochastic matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) throw Error(ErrorKind::kInvalidInput, "stochastic matrix has non-finite entries");
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      double& x = entries_(i, j);
      if (x < -1e-12) {
        std::ostringstream os;
        os << "negative entry " << x << " at (" << i << ", " << j << ")";
        throw Error(ErrorKind::kInvalidInput, os.str());
      }
      if (x < 0.0) x = 0.0;
    }
    const double s = entries_.row(i).sum();
    if (std::abs(s - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "row " << i << " sums to " << s;
      throw Error(ErrorKind::kInvalidInput, os.str());
    }
    entries_.row(i) /= s;
  }
}

ComplexVector uniform_reference(Eigen::Index d) {
  return ComplexVector::Constant(d, Complex(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
}

Rrdo as_rrdo(const StochasticMatrix& m) {
  return Rrdo(m.entries().cast<Complex>(), uniform_reference(m.dim()), NormDescriptor::max_row_sum());
}

bool positive_entries(const StochasticMatrix& m, double eps) { return m.entries().minCoeff() >= eps; }

MatrixEnsemble finite_ensemble(const std::vector<std::pair<StochasticMatrix, double>>& atoms) {
  std::vector<WeightedRrdo> list;
  list.reserve(atoms.size());
  for (const auto& [m, w] : atoms) list.push_back({as_rrdo(m), w});
  return MatrixEnsemble::finite(std::move(list));
}

StochasticMatrix sample_dirichlet(Eigen::Index d, double alpha, RngStream& rng) {
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      m(i, j) = rng.gamma(alpha);
      total += m(i, j);
    }
    m.row(i) /= total;
  }
  return StochasticMatrix(std::move(m));
}

MatrixEnsemble dirichlet_ensemble(Eigen::Index d, double alpha) {
  if (d < 1) throw Error(ErrorKind::kInvalidInput, "dirichlet_ensemble: dimension must be >= 1");
  if (!(alpha > 0.0)) throw Error(ErrorKind::kInvalidInput, "dirichlet_ensemble: alpha must be positive");
  std::ostringstream id;
  id << "stochastic-dirichlet(d=" << d << ",alpha=" << alpha << ")";
  return MatrixEnsemble::parametric(
      id.str(), [d, alpha](RngStream& rng) { return as_rrdo(sample_dirichlet(d, alpha, rng)); },
      uniform_reference(d), NormDescriptor::max_row_sum());
}

namespace {

bool has_positive_mass(const MatrixEnsemble& e, const RngStream& rng, double eps) {
  if (e.support() == MatrixEnsemble::Support::kFiniteDiscrete) {
    for (std::size_t k = 0; k < e.atoms().size(); ++k) {
      if (e.weights()[k] <= 0.0) continue;
      const Eigen::MatrixXd re = e.atoms()[k]->rrdo.matrix.real();
      if (re.minCoeff() >= eps) return true;
    }
    return false;
  }
  RngStream probe(rng.seed() ^ 0x7072'6f62'65ULL, rng.stream_index());
  for (int k = 0; k < 64; ++k) {
    if (e.sample(probe).matrix.real().minCoeff() >= eps) return true;
  }
  return false;
}

}  // namespace

double row_spread(const Eigen::MatrixXd& m) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.rows(); ++j) out = std::max(out, (m.row(i) - m.row(j)).norm());
  }
  return out;
}

ChainResult run_chain(const MatrixEnsemble& ensemble, std::size_t n, RngStream rng,
                      const ChainOptions& options) {
  if (n < 1) throw Error(ErrorKind::kInvalidInput, "run_chain needs n >= 1");
  if (!has_positive_mass(ensemble, rng, options.positivity_eps)) {
    throw Error(ErrorKind::kHypothesisViolated,
                "no strictly positive stochastic matrix has positive probability");
  }
  const auto second_sv = [](const ComplexMatrix& m) {
    const Eigen::VectorXd sv = linalg::singular_values(m);
    return sv.size() > 1 ? sv(1) : 0.0;
  };
  ChainResult out;
  ProductTrajectory t(ensemble, rng);
  for (std::size_t k = 0; k < n; ++k) {
    t.step();
    if (options.record_history) {
      out.rank_one_history.push_back(second_sv(t.phi_n()));
      out.limiting_row_history.push_back(t.phi_n().real().colwise().mean().transpose());
    }
  }

  out.phi_n = t.phi_n();
  const Eigen::MatrixXd phi = out.phi_n.real();
  out.limiting_row = phi.colwise().mean().transpose();
  out.row_spread = row_spread(phi);
  out.rank_one_residual = second_sv(out.phi_n);
  out.eta_inf = eta_infinity(t, options.eta_tol, std::max(options.eta_max_steps, n + 10));
  return out;
}

}  // namespace rrdo::markov
