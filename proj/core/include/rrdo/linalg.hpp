#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace rrdo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace linalg {

/// Inner product, conjugate-linear in the first argument.
inline Complex inner(const ComplexVector& a, const ComplexVector& b) { return a.dot(b); }

/// Rank-one operator |a><b|, i.e. x -> <b, x> a.
inline ComplexMatrix outer(const ComplexVector& a, const ComplexVector& b) {
  return a * b.adjoint();
}

bool all_finite(const ComplexMatrix& m);

/// Throws kInvalidInput when any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, const char* what);

/// Largest singular value.
double operator_norm(const ComplexMatrix& m);

/// Singular values, descending.
Eigen::VectorXd singular_values(const ComplexMatrix& m);

/// Eigenvalues ordered by |lambda| descending, then arg ascending.
std::vector<Complex> eigenvalues(const ComplexMatrix& m);

double spectral_radius(const ComplexMatrix& m);

/// Spectral projector for the eigenvalues enclosed by the circle
/// |z - center| = radius.
struct SpectralCluster {
  Complex center;
  double radius = 0.0;
  ComplexMatrix projector;
  int cluster_dim = 0;
  /// Smallest distance between any eigenvalue and the contour.
  double contour_gap = 0.0;
};

struct RieszOptions {
  /// Eigenvalues closer than this to the contour are rejected. The
  /// effective margin is capped at radius / 2.
  double gap_margin = 1e-8;
};

/// Riesz projector computed from a reordered complex Schur form.
SpectralCluster riesz_projector(const ComplexMatrix& m, Complex center, double radius,
                                const RieszOptions& options = {});

/// Matrix exponential (scaling and squaring with a Pade approximant).
ComplexMatrix matrix_exp(const ComplexMatrix& a);

/// Kronecker product a (x) b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace linalg
}  // namespace rrdo
