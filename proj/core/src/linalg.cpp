#include "rrdo/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rrdo/error.hpp"

namespace rrdo::linalg {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex z = m(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  }
  return true;
}

void require_finite(const ComplexMatrix& m, const char* what) {
  if (m.size() == 0) throw Error(ErrorKind::kInvalidInput, std::string(what) + ": empty matrix");
  if (!all_finite(m)) throw Error(ErrorKind::kInvalidInput, std::string(what) + ": non-finite entry");
}

Eigen::VectorXd singular_values(const ComplexMatrix& m) {
  require_finite(m, "singular_values");
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues();
}

double operator_norm(const ComplexMatrix& m) {
  require_finite(m, "operator_norm");
  if (m.isZero(0.0)) return 0.0;
  return singular_values(m)(0);
}

namespace {

// Argument in (-pi, pi]; a negative zero imaginary part counts as +0.
double canonical_arg(const Complex& z) { return std::atan2(z.imag() == 0.0 ? 0.0 : z.imag(), z.real()); }

bool eigen_order(const Complex& a, const Complex& b) {
  const double ma = std::abs(a);
  const double mb = std::abs(b);
  if (ma != mb) return ma > mb;
  return canonical_arg(a) < canonical_arg(b);
}

// Unitary similarity that swaps the adjacent diagonal entries k, k+1 of an
// upper triangular t; u accumulates the transformation (a = u t u^*).
void swap_adjacent(ComplexMatrix& t, ComplexMatrix& u, Eigen::Index k) {
  const Complex t11 = t(k, k);
  const Complex t22 = t(k + 1, k + 1);
  Complex v1 = t(k, k + 1);
  Complex v2 = t22 - t11;
  const double len = std::hypot(std::abs(v1), std::abs(v2));
  if (len == 0.0) return;  // equal eigenvalues with zero coupling: nothing to do
  v1 /= len;
  v2 /= len;
  Eigen::Matrix2cd g;
  g << v1, -std::conj(v2), v2, std::conj(v1);
  t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
  t.middleCols(k, 2) = t.middleCols(k, 2) * g;
  u.middleCols(k, 2) = u.middleCols(k, 2) * g;
  t(k + 1, k) = 0.0;
  t(k, k) = t22;
  t(k + 1, k + 1) = t11;
}

}  // namespace

std::vector<Complex> eigenvalues(const ComplexMatrix& m) {
  require_finite(m, "eigenvalues");
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumericalFailure, "eigensolver did not converge");
  }
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  double residual = 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    residual = std::max(residual, (m * vecs.col(i) - vals(i) * vecs.col(i)).norm());
  }
  const double scale = std::max(1.0, m.norm());
  if (!std::isfinite(residual) || residual > 1e-6 * scale) {
    std::ostringstream os;
    os << "eigensolver residual " << residual << " exceeds 1e-6 * ||M||_F";
    throw Error(ErrorKind::kNumericalFailure, os.str());
  }
  std::vector<Complex> out(vals.data(), vals.data() + vals.size());
  std::sort(out.begin(), out.end(), eigen_order);
  return out;
}

double spectral_radius(const ComplexMatrix& m) {
  const auto vals = eigenvalues(m);
  return vals.empty() ? 0.0 : std::abs(vals.front());
}

SpectralCluster riesz_projector(const ComplexMatrix& m, Complex center, double radius,
                                const RieszOptions& options) {
  require_finite(m, "riesz_projector");
  if (m.rows() != m.cols()) throw Error(ErrorKind::kInvalidInput, "riesz_projector: matrix not square");
  if (!(radius > 0.0)) throw Error(ErrorKind::kInvalidInput, "riesz_projector: radius must be positive");

  Eigen::ComplexSchur<ComplexMatrix> schur(m);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumericalFailure, "complex Schur decomposition did not converge");
  }
  ComplexMatrix t = schur.matrixT();
  ComplexMatrix u = schur.matrixU();
  const Eigen::Index n = t.rows();

  const double margin = std::min(options.gap_margin, 0.5 * radius);
  double gap = std::numeric_limits<double>::infinity();
  std::vector<bool> inside(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dist = std::abs(t(i, i) - center);
    const double to_contour = std::abs(dist - radius);
    gap = std::min(gap, to_contour);
    if (to_contour < margin) {
      std::ostringstream os;
      os << "eigenvalue " << t(i, i) << " lies " << to_contour << " from the contour (margin "
         << margin << ")";
      throw Error(ErrorKind::kGapViolation, os.str());
    }
    inside[static_cast<size_t>(i)] = dist < radius;
  }

  // Bubble the enclosed eigenvalues to the leading block, preserving the
  // relative order within each group.
  Eigen::Index placed = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!inside[static_cast<size_t>(i)]) continue;
    for (Eigen::Index k = i; k > placed; --k) {
      swap_adjacent(t, u, k - 1);
      std::swap(inside[static_cast<size_t>(k)], inside[static_cast<size_t>(k - 1)]);
    }
    ++placed;
  }

  SpectralCluster out;
  out.center = center;
  out.radius = radius;
  out.cluster_dim = static_cast<int>(placed);
  out.contour_gap = gap;
  if (placed == 0) {
    out.projector = ComplexMatrix::Zero(n, n);
    return out;
  }
  if (placed == n) {
    out.projector = ComplexMatrix::Identity(n, n);
    return out;
  }

  // Solve t11 y - y t22 = t12, column by column (t22 upper triangular).
  const Eigen::Index p = placed;
  const Eigen::Index q = n - p;
  const ComplexMatrix t11 = t.topLeftCorner(p, p);
  const ComplexMatrix t22 = t.bottomRightCorner(q, q);
  const ComplexMatrix t12 = t.topRightCorner(p, q);
  ComplexMatrix y(p, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    ComplexVector rhs = t12.col(j);
    for (Eigen::Index i = 0; i < j; ++i) rhs += y.col(i) * t22(i, j);
    ComplexMatrix shifted = t11;
    shifted.diagonal().array() -= t22(j, j);
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }

  ComplexMatrix block = ComplexMatrix::Zero(n, n);
  block.topLeftCorner(p, p).setIdentity();
  block.topRightCorner(p, q) = y;
  out.projector = u * block * u.adjoint();
  if (!all_finite(out.projector)) {
    throw Error(ErrorKind::kNumericalFailure, "riesz_projector: non-finite projector");
  }
  return out;
}

ComplexMatrix matrix_exp(const ComplexMatrix& a) {
  require_finite(a, "matrix_exp");
  if (a.rows() != a.cols()) throw Error(ErrorKind::kInvalidInput, "matrix_exp: matrix not square");
  ComplexMatrix out = a.exp();
  if (!all_finite(out)) throw Error(ErrorKind::kNumericalFailure, "matrix_exp: overflow");
  return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace rrdo::linalg
