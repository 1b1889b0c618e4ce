#include <cmath>
#include <limits>
#include <numbers>

#include "helpers.hpp"

using namespace rrdo;
using namespace testing;

TEST_CASE("operator_norm examples") {
  CHECK(linalg::operator_norm(ComplexMatrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(linalg::operator_norm(ComplexMatrix::Zero(2, 2)) == 0.0);
  CHECK(linalg::operator_norm(mat2(0, 2, 0, 0)) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("operator_norm rejects non-finite entries") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_kind([&] { linalg::operator_norm(m); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("spectral_radius examples") {
  CHECK(linalg::spectral_radius(mat2(1, 0, 0, 0.5)) == doctest::Approx(1.0));
  CHECK(linalg::spectral_radius(mat2(0, 1, 0, 0)) == doctest::Approx(0.0));
  CHECK(linalg::spectral_radius(stochastic2(0.3, 0.1)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigenvalues are ordered by modulus then argument") {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m.diagonal() << Complex(0, 1), 0.5, -1.0, 1.0;
  const auto ev = linalg::eigenvalues(m);
  REQUIRE(ev.size() == 4);
  CHECK(std::abs(ev[0] - Complex(1.0, 0.0)) < 1e-14);  // args 0 < pi/2 < pi
  CHECK(std::abs(ev[1] - Complex(0.0, 1.0)) < 1e-14);
  CHECK(std::abs(ev[2] - Complex(-1.0, 0.0)) < 1e-14);
  CHECK(std::abs(ev[3] - Complex(0.5, 0.0)) < 1e-14);
}

TEST_CASE("riesz_projector examples") {
  auto c = linalg::riesz_projector(mat2(1, 0, 0, 0.5), 1.0, 0.2);
  CHECK(c.cluster_dim == 1);
  CHECK((c.projector - mat2(1, 0, 0, 0)).norm() < 1e-14);

  c = linalg::riesz_projector(mat2(1, 1, 0, 1), 1.0, 0.2);
  CHECK(c.cluster_dim == 2);
  CHECK((c.projector - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);

  // Rank-one |r><l| / <l, r> with r = (1, 1), l = (1, 3).
  c = linalg::riesz_projector(stochastic2(0.3, 0.1), 1.0, 0.1);
  const ComplexMatrix expected = (1.0 / 0.4) * mat2(0.1, 0.3, 0.1, 0.3);
  CHECK(c.cluster_dim == 1);
  CHECK((c.projector - expected).norm() < 1e-12);
}

TEST_CASE("riesz_projector refuses eigenvalues on the contour") {
  CHECK(error_kind([] { linalg::riesz_projector(mat2(1, 0, 0, 0.5), 1.0, 0.5); }) == ErrorKind::kGapViolation);
}

TEST_CASE("riesz projectors commute with M and are idempotent") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index d = 2 + trial % 6;
    const ComplexMatrix m = random_matrix(rng, d);
    const auto ev = linalg::eigenvalues(m);
    // Disk around the dominant eigenvalue, radius half-way to the next one.
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < ev.size(); ++k) gap = std::min(gap, std::abs(ev[k] - ev[0]));
    const auto c = linalg::riesz_projector(m, ev[0], gap / 2);
    const ComplexMatrix& p = c.projector;
    CHECK((p * m - m * p).norm() <= 1e-10 * linalg::operator_norm(m) * std::max(1.0, p.norm()));
    CHECK((p * p - p).norm() <= 1e-10 * std::max(1.0, p.norm() * p.norm()));
    CHECK(std::abs(p.trace() - Complex(c.cluster_dim, 0)) < 1e-9);
  }
}

TEST_CASE("riesz projector at 1 keeps an invariant vector") {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index d = 3;
    ComplexMatrix m = 0.3 * random_matrix(rng, d);
    ComplexVector psi = ComplexVector::Ones(d) / std::sqrt(3.0);
    // Force M psi = psi by a rank-one correction.
    m += (psi - m * psi) * psi.adjoint();
    const auto c = linalg::riesz_projector(m, 1.0, 1e-8);
    CHECK((c.projector * psi - psi).norm() < 1e-10);
  }
}

TEST_CASE("matrix_exp examples") {
  CHECK((linalg::matrix_exp(ComplexMatrix::Zero(3, 3)) - ComplexMatrix::Identity(3, 3)).norm() < 1e-15);
  const Complex ipi(0.0, std::numbers::pi);
  CHECK((linalg::matrix_exp(mat2(ipi, 0, 0, 0)) - mat2(-1, 0, 0, 1)).norm() < 1e-14);
  CHECK((linalg::matrix_exp(mat2(0, 1, 0, 0)) - mat2(1, 1, 0, 1)).norm() < 1e-15);
}

TEST_CASE("matrix_exp inverse property up to norm 50") {
  RngStream rng(13, 0);
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix a = random_matrix(rng, 4);
    a *= (1.0 + 49.0 * rng.uniform()) / linalg::operator_norm(a);
    // Skew-Hermitian part keeps e^A well conditioned at norm 50.
    a = 0.5 * (a - ComplexMatrix(a.adjoint()));
    const ComplexMatrix prod = linalg::matrix_exp(a) * linalg::matrix_exp(-a);
    CHECK((prod - ComplexMatrix::Identity(4, 4)).norm() < 1e-10);
  }
}

TEST_CASE("matrix_exp agrees with the spectral oracle on Hermitian input") {
  RngStream rng(14, 0);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix h = random_matrix(rng, 5);
    h = 0.5 * (h + ComplexMatrix(h.adjoint()));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const ComplexMatrix oracle = es.eigenvectors() *
                                 es.eigenvalues().array().exp().matrix().cast<Complex>().asDiagonal() *
                                 es.eigenvectors().adjoint();
    const ComplexMatrix got = linalg::matrix_exp(h);
    CHECK((got - oracle).norm() <= 1e-12 * oracle.norm());
  }
}

TEST_CASE("matrix_exp reports overflow") {
  CHECK(error_kind([] { linalg::matrix_exp(mat2(1e6, 0, 0, 0)); }) == ErrorKind::kNumericalFailure);
}
