#include "rrdo/rrdo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rrdo/error.hpp"
#include "rrdo/rng.hpp"

namespace rrdo {

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::kEuclideanOperator: return "euclidean-operator";
    case NormKind::kMaxRowSum: return "max-row-sum";
    case NormKind::kReferenceInduced: return "reference-induced";
  }
  return "unknown";
}

namespace {

Eigen::Index square_side(Eigen::Index n) {
  auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d < 1 || d * d != n) return -1;
  return d;
}

// Row-major reshape of a d^2 vector into d x d.
ComplexMatrix reshape(const ComplexVector& v, Eigen::Index d) {
  ComplexMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  return m;
}

ComplexVector random_unit(RngStream& rng, Eigen::Index n) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

}  // namespace

NormDescriptor NormDescriptor::euclidean() { return NormDescriptor(NormKind::kEuclideanOperator); }

NormDescriptor NormDescriptor::max_row_sum() { return NormDescriptor(NormKind::kMaxRowSum); }

NormDescriptor NormDescriptor::reference_induced(const ComplexVector& reference) {
  linalg::require_finite(reference, "reference vector");
  const Eigen::Index d = square_side(reference.size());
  if (d < 1) {
    throw Error(ErrorKind::kInvalidInput, "reference-induced norm needs a vector of dimension d^2");
  }
  const ComplexMatrix mat = reshape(reference, d);
  const Eigen::VectorXd sv = linalg::singular_values(mat);
  if (sv(0) == 0.0 || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    throw Error(ErrorKind::kReferenceNotSeparating, "reshaped reference vector is not invertible");
  }
  NormDescriptor out(NormKind::kReferenceInduced);
  out.reference_ = reference;
  out.inverse_ = std::make_shared<const ComplexMatrix>(mat.inverse());
  out.inverse_norm_ = 1.0 / sv(sv.size() - 1);
  return out;
}

const ComplexMatrix& NormDescriptor::reference_inverse() const {
  if (!inverse_) throw Error(ErrorKind::kInvalidInput, "norm has no reference vector");
  return *inverse_;
}

Rrdo::Rrdo(ComplexMatrix m, ComplexVector psi, NormDescriptor n)
    : matrix(std::move(m)), psi_s(std::move(psi)), norm(std::move(n)) {
  linalg::require_finite(matrix, "Rrdo matrix");
  linalg::require_finite(psi_s, "Rrdo psi_s");
  if (matrix.rows() != matrix.cols()) throw Error(ErrorKind::kInvalidInput, "Rrdo matrix not square");
  if (psi_s.size() != matrix.rows()) throw Error(ErrorKind::kInvalidInput, "psi_s dimension mismatch");
  const double len = psi_s.norm();
  if (len == 0.0) throw Error(ErrorKind::kInvalidInput, "psi_s must be nonzero");
  psi_s /= len;
  if (norm.kind() == NormKind::kReferenceInduced && norm.reference()->size() != matrix.rows()) {
    throw Error(ErrorKind::kInvalidInput, "reference vector dimension mismatch");
  }
}

double triple_norm(const ComplexVector& v, const NormDescriptor& norm) {
  switch (norm.kind()) {
    case NormKind::kEuclideanOperator:
      return v.norm();
    case NormKind::kMaxRowSum:
      return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
    case NormKind::kReferenceInduced: {
      const ComplexMatrix& inv = norm.reference_inverse();
      if (v.size() != inv.rows() * inv.rows()) {
        throw Error(ErrorKind::kInvalidInput, "vector dimension does not match reference");
      }
      return linalg::operator_norm(reshape(v, inv.rows()) * inv);
    }
  }
  return 0.0;
}

double triple_norm(const ComplexMatrix& m, const NormDescriptor& norm, int probes,
                   std::uint64_t seed) {
  switch (norm.kind()) {
    case NormKind::kEuclideanOperator:
      return linalg::operator_norm(m);
    case NormKind::kMaxRowSum:
      return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::kReferenceInduced: {
      double best = 0.0;
      const Eigen::Index n = m.cols();
      for (Eigen::Index i = 0; i < n; ++i) {
        const ComplexVector e = ComplexVector::Unit(n, i);
        best = std::max(best, triple_norm(ComplexVector(m * e), norm) / triple_norm(e, norm));
      }
      RngStream rng(seed, 0);
      for (int k = 0; k < probes; ++k) {
        const ComplexVector phi = random_unit(rng, n);
        best = std::max(best, triple_norm(ComplexVector(m * phi), norm) / triple_norm(phi, norm));
      }
      return best;
    }
  }
  return 0.0;
}

ValidationReport validate_rrdo(const Rrdo& r, int probes, std::uint64_t seed) {
  if (probes < 1) throw Error(ErrorKind::kInvalidInput, "validate_rrdo: probes must be >= 1");
  constexpr double kTol = 1e-10;
  ValidationReport rep;
  const Eigen::Index d = r.dim();

  rep.invariance_residual = (r.matrix * r.psi_s - r.psi_s).norm();
  if (!(rep.invariance_residual <= kTol)) {
    std::ostringstream os;
    os << "M psi_s != psi_s (residual " << rep.invariance_residual << ")";
    rep.violations.push_back(os.str());
  }

  switch (r.norm.kind()) {
    case NormKind::kEuclideanOperator:
    case NormKind::kMaxRowSum:
      rep.contraction_ratio = triple_norm(r.matrix, r.norm);
      break;
    case NormKind::kReferenceInduced: {
      RngStream rng(seed, 0);
      double worst = 0.0;
      for (int k = 0; k < probes; ++k) {
        const ComplexVector phi = random_unit(rng, d);
        worst = std::max(worst, triple_norm(ComplexVector(r.matrix * phi), r.norm) /
                                    triple_norm(phi, r.norm));
      }
      rep.contraction_ratio = worst;
      break;
    }
  }
  if (!(rep.contraction_ratio <= 1.0 + kTol)) {
    std::ostringstream os;
    os << "not a contraction in the " << to_string(r.norm.kind()) << " norm (ratio "
       << rep.contraction_ratio << ")";
    rep.violations.push_back(os.str());
  }

  switch (r.norm.kind()) {
    case NormKind::kEuclideanOperator: rep.power_norm_allowed = 1.0; break;
    case NormKind::kMaxRowSum: rep.power_norm_allowed = std::sqrt(static_cast<double>(d)); break;
    case NormKind::kReferenceInduced: rep.power_norm_allowed = r.norm.reference_inverse_norm(); break;
  }
  // Exact contraction certificates already bound every power.
  if (r.norm.kind() != NormKind::kReferenceInduced) return rep;
  ComplexMatrix power = ComplexMatrix::Identity(d, d);
  for (int k = 1; k <= 64; ++k) {
    power = power * r.matrix;
    if (!linalg::all_finite(power)) {
      rep.power_norm_max = std::numeric_limits<double>::infinity();
      break;
    }
    rep.power_norm_max = std::max(rep.power_norm_max, linalg::operator_norm(power));
  }
  if (!(rep.power_norm_max <= rep.power_norm_allowed * (1.0 + 1e-8))) {
    std::ostringstream os;
    os << "powers unbounded: max_k ||M^k|| = " << rep.power_norm_max << " > "
       << rep.power_norm_allowed;
    rep.violations.push_back(os.str());
  }
  return rep;
}

RrdoDecomposition decompose(const Rrdo& r, double tol) {
  RrdoDecomposition out;
  out.p1 = linalg::riesz_projector(r.matrix, Complex(1.0, 0.0), tol);
  if (out.p1.cluster_dim < 1) {
    throw Error(ErrorKind::kNotAnRrdo, "1 is not an eigenvalue within tolerance");
  }
  const Eigen::Index d = r.dim();
  out.psi = out.p1.projector.adjoint() * r.psi_s;
  out.p = linalg::outer(r.psi_s, out.psi);
  out.q = ComplexMatrix::Identity(d, d) - out.p;
  out.m_q = out.q * r.matrix * out.q;
  out.sr_mq = linalg::spectral_radius(out.m_q);
  out.in_me = out.p1.cluster_dim == 1 && out.sr_mq < 1.0 - tol;
  return out;
}

}  // namespace rrdo
