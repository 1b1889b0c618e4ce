#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "rrdo/rrdo.hpp"

using namespace rrdo;
using namespace testing;

namespace {

const double kR2 = 1.0 / std::sqrt(2.0);

ComplexVector bell() { return vec({kR2, 0, 0, kR2}); }

}  // namespace

TEST_CASE("triple_norm examples") {
  CHECK(triple_norm(stochastic2(0.3, 0.1), NormDescriptor::max_row_sum()) == doctest::Approx(1.0));
  const auto ref = NormDescriptor::reference_induced(bell());
  CHECK(triple_norm(bell(), ref) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(triple_norm(vec({2 * kR2, 0, 0, kR2}), ref) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("reference-induced norm needs a separating reference") {
  CHECK(error_kind([] { NormDescriptor::reference_induced(vec({1, 0, 0, 0})); }) ==
        ErrorKind::kReferenceNotSeparating);
  CHECK(error_kind([] { NormDescriptor::reference_induced(vec({1, 0, 0})); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("reference-induced norm is the norm of A in phi = (A x 1) psi") {
  RngStream rng(21, 0);
  const auto ref = NormDescriptor::reference_induced(bell());
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = random_matrix(rng, 2);
    const ComplexVector phi = linalg::kron(a, ComplexMatrix::Identity(2, 2)) * bell();
    CHECK(triple_norm(phi, ref) == doctest::Approx(linalg::operator_norm(a)).epsilon(1e-12));
  }
}

TEST_CASE("validate_rrdo examples") {
  const ComplexVector psi = vec({kR2, kR2});
  CHECK(validate_rrdo(Rrdo(ComplexMatrix::Identity(2, 2), psi, NormDescriptor::euclidean())).passed());
  const auto scaled = validate_rrdo(Rrdo(2.0 * ComplexMatrix::Identity(2, 2), psi, NormDescriptor::euclidean()));
  CHECK_FALSE(scaled.passed());
  CHECK(scaled.contraction_ratio == doctest::Approx(2.0));
  CHECK(validate_rrdo(Rrdo(stochastic2(0.3, 0.1), psi, NormDescriptor::max_row_sum())).passed());
}

TEST_CASE("validate_rrdo flags a broken invariant vector") {
  const ComplexVector psi = vec({1, 0});
  const auto rep = validate_rrdo(Rrdo(mat2(0, 1, 1, 0), psi, NormDescriptor::euclidean()));
  CHECK_FALSE(rep.passed());
  CHECK(rep.invariance_residual == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("decompose: two-state stochastic matrix") {
  const Rrdo r(stochastic2(0.3, 0.1), vec({kR2, kR2}), NormDescriptor::max_row_sum());
  const auto d = decompose(r);
  CHECK((d.psi - std::sqrt(2.0) * vec({0.25, 0.75})).norm() < 1e-12);
  CHECK(d.sr_mq == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(d.in_me);
}

TEST_CASE("decompose: identity is not in M_E") {
  const Rrdo r(ComplexMatrix::Identity(2, 2), vec({kR2, kR2}), NormDescriptor::euclidean());
  const auto d = decompose(r);
  CHECK(d.p1.cluster_dim == 2);
  CHECK((d.p1.projector - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
  CHECK((d.psi - r.psi_s).norm() < 1e-14);
  CHECK_FALSE(d.in_me);
}

TEST_CASE("decompose: a second unimodular eigenvalue excludes M_E") {
  const Complex w = std::exp(Complex(0, std::numbers::pi / 3));
  const Rrdo r(mat2(1, 0, 0, w), vec({1, 0}), NormDescriptor::euclidean());
  const auto d = decompose(r);
  CHECK(d.p1.cluster_dim == 1);
  CHECK_FALSE(d.in_me);
}

TEST_CASE("decompose requires eigenvalue 1") {
  const Rrdo r(0.5 * ComplexMatrix::Identity(2, 2), vec({1, 0}), NormDescriptor::euclidean());
  CHECK(error_kind([&] { decompose(r); }) == ErrorKind::kNotAnRrdo);
}

TEST_CASE("decomposition invariants on random stochastic matrices") {
  RngStream rng(22, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = 2 + trial % 5;
    ComplexMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) s += (m(i, j) = rng.uniform_open()).real();
      m.row(i) /= s;
    }
    const Rrdo r(m, ComplexVector::Ones(d), NormDescriptor::max_row_sum());
    const auto dec = decompose(r);
    const ComplexMatrix& p = dec.p;
    const ComplexMatrix& q = dec.q;
    CHECK(std::abs(linalg::inner(r.psi_s, dec.psi) - 1.0) < 1e-10);
    CHECK((p * p - p).norm() < 1e-10);
    CHECK((q * q - q).norm() < 1e-10);
    CHECK((p * q).norm() < 1e-10);
    CHECK((q * p).norm() < 1e-10);
    CHECK((dec.m_q * r.psi_s).norm() < 1e-10);
    CHECK((dec.psi.adjoint() * dec.m_q).norm() < 1e-10);
    CHECK((p + dec.m_q - m).norm() < 1e-10);
    CHECK(dec.in_me);

    // M_Q^64 against the spectral-radius envelope with a fitted constant.
    ComplexMatrix pw = ComplexMatrix::Identity(d, d);
    for (int k = 0; k < 64; ++k) pw = pw * dec.m_q;
    const double c = 1e3 * std::max(1.0, linalg::operator_norm(dec.m_q));
    CHECK(linalg::operator_norm(pw) <= c * std::pow(dec.sr_mq, 64 * 0.9) + 1e-300);

    // Decomposing P + M_Q reproduces the pieces.
    const Rrdo again(p + dec.m_q, r.psi_s, NormDescriptor::euclidean());
    const auto dec2 = decompose(again);
    CHECK((dec2.p - p).norm() < 1e-9);
    CHECK((dec2.m_q - dec.m_q).norm() < 1e-9);
  }
}
