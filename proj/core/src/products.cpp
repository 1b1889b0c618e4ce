#include "rrdo/products.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rrdo {

ProductTrajectory::ProductTrajectory(const MatrixEnsemble& ensemble, RngStream rng)
    : ensemble_(&ensemble), rng_(rng) {
  const Eigen::Index d = ensemble.dim();
  psi_ = ComplexMatrix::Identity(d, d);
  phi_ = ComplexMatrix::Identity(d, d);
  theta_ = ComplexVector::Zero(d);
  eta_ = ComplexVector::Zero(d);
  forward_mq_unit_ = ComplexMatrix::Identity(d, d);
  reverse_mq_ = ComplexMatrix::Identity(d, d);
}

void ProductTrajectory::step() {
  last_ = ensemble_->draw(rng_);
  const ComplexMatrix& m = last_->rrdo.matrix;
  const ComplexVector& psi_j = last_->decomposition.psi;
  const ComplexMatrix& mq = last_->decomposition.m_q;

  if (n_ == 0) {
    psi_ = m;
    phi_ = m;
    theta_ = psi_j;
    eta_ = psi_j;
    eta_increment_ = 0.0;
  } else {
    psi_ = psi_ * m;
    phi_ = m * phi_;
    theta_ = m.adjoint() * theta_;
    // eta_{n+1} = eta_n + (M_Q(omega_n)...M_Q(omega_1))^* psi(omega_{n+1})
    const ComplexVector increment = reverse_mq_.adjoint() * psi_j;
    eta_ += increment;
    eta_increment_ = increment.norm();
  }
  reverse_mq_ = mq * reverse_mq_;

  if (annihilated_) {
    log_norms_.push_back(kLogNormFloor);
  } else {
    forward_mq_unit_ = forward_mq_unit_ * mq;
    const double nrm = linalg::operator_norm(forward_mq_unit_);
    if (nrm == 0.0) {
      annihilated_ = true;
      forward_mq_unit_.setZero();
      log_norms_.push_back(kLogNormFloor);
    } else {
      forward_mq_unit_ /= nrm;
      forward_mq_log_scale_ += std::log(nrm);
      log_norms_.push_back(forward_mq_log_scale_);
    }
  }

  c0_ = std::max({c0_, linalg::operator_norm(psi_), linalg::operator_norm(phi_)});
  ++n_;
}

ComplexMatrix ProductTrajectory::mq_forward_product() const {
  if (annihilated_) return ComplexMatrix::Zero(psi_.rows(), psi_.cols());
  return std::exp(forward_mq_log_scale_) * forward_mq_unit_;
}

double check_decomposition(const ProductTrajectory& t) {
  if (t.n_steps() < 1) throw Error(ErrorKind::kInvalidInput, "check_decomposition needs n >= 1");
  const ComplexMatrix rank_one = linalg::outer(t.ensemble().psi_s(), t.theta_n());
  return linalg::operator_norm(t.psi_n() - rank_one - t.mq_forward_product());
}

CompensatedSum::CompensatedSum(Eigen::Index rows, Eigen::Index cols)
    : sum_(ComplexMatrix::Zero(rows, cols)), comp_(ComplexMatrix::Zero(rows, cols)) {}

namespace {

// Neumaier step on one real component.
inline void neumaier(double& sum, double& comp, double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

}  // namespace

void CompensatedSum::add(const ComplexMatrix& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double sr = sum_(i, j).real(), si = sum_(i, j).imag();
      double cr = comp_(i, j).real(), ci = comp_(i, j).imag();
      neumaier(sr, cr, x(i, j).real());
      neumaier(si, ci, x(i, j).imag());
      sum_(i, j) = Complex(sr, si);
      comp_(i, j) = Complex(cr, ci);
    }
  }
}

CesaroAverage cesaro(const MatrixEnsemble& ensemble, RngStream rng, std::size_t n,
                     CesaroTarget target, std::size_t batches) {
  if (n < 1) throw Error(ErrorKind::kInvalidInput, "cesaro needs N >= 1");
  const Eigen::Index d = ensemble.dim();
  const Eigen::Index cols = target == CesaroTarget::kTheta ? 1 : d;
  batches = std::clamp<std::size_t>(batches, 1, n);
  const std::size_t batch_len = n / batches;

  ProductTrajectory t(ensemble, rng);
  CompensatedSum total(d, cols);
  CompensatedSum batch(d, cols);
  std::vector<ComplexMatrix> batch_means;
  for (std::size_t k = 1; k <= n; ++k) {
    t.step();
    const ComplexMatrix x = target == CesaroTarget::kTheta ? ComplexMatrix(t.theta_n()) : t.psi_n();
    total.add(x);
    batch.add(x);
    if (k % batch_len == 0 && batch_means.size() < batches) {
      batch_means.push_back(batch.total() / static_cast<double>(batch_len));
      batch = CompensatedSum(d, cols);
    }
  }

  CesaroAverage out;
  out.target = target;
  out.n = n;
  out.value = total.total() / static_cast<double>(n);
  out.batch_std_error = Eigen::MatrixXd::Zero(d, cols);
  const auto nb = static_cast<double>(batch_means.size());
  if (batch_means.size() >= 2) {
    ComplexMatrix mean = ComplexMatrix::Zero(d, cols);
    for (const auto& b : batch_means) mean += b;
    mean /= nb;
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(d, cols);
    for (const auto& b : batch_means) var += (b - mean).cwiseAbs2();
    var /= (nb - 1.0);
    out.batch_std_error = (var / nb).cwiseSqrt();
  }
  return out;
}

DecayFit decay_fit(const std::vector<double>& log_norms, std::size_t window) {
  const std::size_t n = log_norms.size();
  if (window < 2) throw Error(ErrorKind::kInvalidInput, "decay_fit window must be >= 2");
  if (n < 2 * window) {
    std::ostringstream os;
    os << "decay_fit needs n_steps >= 2 * window (" << n << " < " << 2 * window << ")";
    throw Error(ErrorKind::kInvalidInput, os.str());
  }
  DecayFit fit;
  fit.exact_annihilation =
      std::any_of(log_norms.begin(), log_norms.end(), [](double y) { return y == kLogNormFloor; });

  const std::size_t first = n - window + 1;  // k is 1-based
  double mx = 0.0, my = 0.0;
  for (std::size_t k = first; k <= n; ++k) {
    mx += static_cast<double>(k);
    my += log_norms[k - 1];
  }
  mx /= static_cast<double>(window);
  my /= static_cast<double>(window);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = first; k <= n; ++k) {
    const double dx = static_cast<double>(k) - mx;
    const double dy = log_norms[k - 1] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  const double scale = std::max(1.0, my * my) * static_cast<double>(window);
  fit.r_squared = syy <= 1e-24 * scale ? 0.0 : 1.0 - ss_res / syy;

  double max_resid = -std::numeric_limits<double>::infinity();
  for (std::size_t k = first; k <= n; ++k) {
    max_resid = std::max(max_resid, log_norms[k - 1] - (intercept + fit.slope * static_cast<double>(k)));
  }
  const double log_c = intercept + max_resid;
  fit.c_hat = std::exp(log_c);

  fit.onset_n0 = n;
  for (std::size_t k = n; k >= 1; --k) {
    const double envelope = log_c + fit.slope * static_cast<double>(k);
    if (log_norms[k - 1] > envelope + 1e-12 * std::max(1.0, std::abs(envelope))) break;
    fit.onset_n0 = k;
  }

  if (fit.r_squared >= 0.9) fit.alpha_hat = -fit.slope;
  return fit;
}

DecayFit decay_fit(const ProductTrajectory& t, std::size_t window) {
  return decay_fit(t.mq_product_norm_log(), window);
}

ForwardLimit forward_limit(const MatrixEnsemble& ensemble, RngStream rng, std::size_t n,
                           double tol) {
  if (n < 8) throw Error(ErrorKind::kInvalidInput, "forward_limit needs N >= 8");
  ProductTrajectory t(ensemble, rng);
  const std::size_t quarter_start = n - n / 4;
  std::vector<ComplexMatrix> tail;
  tail.reserve(n / 4 + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    t.step();
    if (k >= quarter_start) tail.push_back(t.psi_n());
  }

  ForwardLimit out;
  out.decay = decay_fit(t, n / 2);
  const bool decays = t.exact_annihilation() || (out.decay.alpha_hat && *out.decay.alpha_hat > 0.0);
  if (!decays) {
    throw Error(ErrorKind::kHypothesisViolated, "M_Q product does not decay on this trajectory");
  }
  const ComplexMatrix& last = t.psi_n();
  for (const auto& m : tail) out.trailing_sup = std::max(out.trailing_sup, linalg::operator_norm(m - last));
  out.converged = out.trailing_sup <= tol;
  if (out.converged) {
    out.limit = last;
    if (ensemble.constant_psi()) {
      out.rank_one_limit = linalg::outer(ensemble.psi_s(), ensemble.atoms().front()->decomposition.psi);
    }
  }
  return out;
}

ComplexVector eta_infinity(ProductTrajectory& t, double tol, std::size_t max_steps) {
  constexpr int kConsecutive = 10;
  int quiet = 0;
  if (t.n_steps() == 0) t.step();
  while (quiet < kConsecutive) {
    if (t.n_steps() >= max_steps) {
      std::ostringstream os;
      os << "eta increments did not settle within " << max_steps << " steps (last increment "
         << t.last_eta_increment() << ")";
      throw Error(ErrorKind::kNotConverged, os.str());
    }
    t.step();
    quiet = t.last_eta_increment() <= tol ? quiet + 1 : 0;
  }
  return t.eta_n();
}

LyapunovReport lyapunov(const MatrixEnsemble& ensemble, std::size_t n, RngStream rng,
                        std::size_t reorthonormalize_every) {
  if (n < 100) throw Error(ErrorKind::kInvalidInput, "lyapunov needs n >= 100");
  if (reorthonormalize_every < 1) reorthonormalize_every = 1;
  const Eigen::Index d = ensemble.dim();
  ComplexMatrix basis = ComplexMatrix::Identity(d, d);
  std::vector<double> sums(static_cast<std::size_t>(d), 0.0);
  std::vector<bool> collapsed(static_cast<std::size_t>(d), false);

  auto reorthonormalize = [&]() {
    Eigen::HouseholderQR<ComplexMatrix> qr(basis);
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double rii = std::abs(r(i, i));
      if (rii == 0.0 || collapsed[static_cast<std::size_t>(i)]) {
        collapsed[static_cast<std::size_t>(i)] = true;
      } else {
        sums[static_cast<std::size_t>(i)] += std::log(rii);
      }
    }
    basis = q;
  };

  for (std::size_t k = 1; k <= n; ++k) {
    basis = ensemble.draw(rng)->rrdo.matrix.adjoint() * basis;
    if (k % reorthonormalize_every == 0 || k == n) reorthonormalize();
  }

  LyapunovReport out;
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out.exponents.push_back(collapsed[idx] ? -std::numeric_limits<double>::infinity()
                                           : sums[idx] / static_cast<double>(n));
  }
  std::sort(out.exponents.begin(), out.exponents.end(), std::greater<>());
  if (out.exponents.size() >= 2) out.top_multiplicity_gap = out.exponents[0] - out.exponents[1];
  return out;
}

}  // namespace rrdo
