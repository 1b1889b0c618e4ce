#include <cmath>

#include "helpers.hpp"
#include "rrdo/markov.hpp"
#include "rrdo/products.hpp"

using namespace rrdo;
using namespace testing;

namespace {

const ComplexVector kPsi2 = vec({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});

Rrdo stoch(double a, double b) { return Rrdo(stochastic2(a, b), kPsi2, NormDescriptor::max_row_sum()); }

MatrixEnsemble two_atoms() { return MatrixEnsemble::finite({{stoch(0.3, 0.1), 0.5}, {stoch(0.1, 0.3), 0.5}}); }

MatrixEnsemble constant(const Rrdo& r) { return MatrixEnsemble::finite({{r, 1.0}}); }

}  // namespace

TEST_CASE("step: single atom gives matrix powers") {
  const auto e = constant(stoch(0.3, 0.1));
  ProductTrajectory t(e, RngStream(1, 0));
  t.advance(7);
  ComplexMatrix pw = ComplexMatrix::Identity(2, 2);
  for (int k = 0; k < 7; ++k) pw = pw * stochastic2(0.3, 0.1);
  CHECK((t.psi_n() - pw).norm() < 1e-14);
  CHECK((t.phi_n() - pw).norm() < 1e-14);
}

TEST_CASE("step: theta_1 is psi of the first draw") {
  const auto e = two_atoms();
  ProductTrajectory t(e, RngStream(2, 0));
  t.step();
  CHECK((t.theta_n() - t.last_atom()->decomposition.psi).norm() == 0.0);
  CHECK(check_decomposition(t) <= 1e-12);
}

TEST_CASE("step: naive triple product oracle") {
  const auto e = two_atoms();
  ProductTrajectory t(e, RngStream(3, 0));
  RngStream replay(3, 0);
  ComplexMatrix forward = ComplexMatrix::Identity(2, 2), reverse = ComplexMatrix::Identity(2, 2);
  for (int k = 0; k < 3; ++k) {
    t.step();
    const ComplexMatrix m = e.draw(replay)->rrdo.matrix;
    forward = forward * m;
    reverse = m * reverse;
  }
  CHECK((t.psi_n() - forward).norm() < 1e-15);
  CHECK((t.phi_n() - reverse).norm() < 1e-15);
}

TEST_CASE("trajectory invariants on random stochastic products") {
  const auto e = markov::dirichlet_ensemble(3, 1.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ProductTrajectory t(e, RngStream(seed, 0));
    RngStream replay(seed, 0);
    ComplexVector telescoped = ComplexVector::Zero(3);  // M_1^*...M_{n-1}^* psi_n
    ComplexMatrix adj_prefix = ComplexMatrix::Identity(3, 3);
    for (std::size_t n = 1; n <= 100; ++n) {
      t.step();
      const auto atom = e.draw(replay);
      telescoped = adj_prefix * atom->decomposition.psi;
      adj_prefix = adj_prefix * atom->rrdo.matrix.adjoint();
      const double tol = 1e-8 * static_cast<double>(n);
      CHECK(check_decomposition(t) <= tol);
      CHECK(std::abs(linalg::inner(e.psi_s(), t.theta_n()) - 1.0) <= tol);
      CHECK(std::abs(linalg::inner(e.psi_s(), t.eta_n()) - 1.0) <= tol);
      CHECK((t.eta_n() - telescoped).norm() <= tol);
      CHECK(linalg::operator_norm(t.psi_n()) <= t.c0_observed() + 1e-12);
    }
    CHECK(check_decomposition(t) <= 1e-6);
  }
}

TEST_CASE("check_decomposition on a constant bistochastic atom") {
  const auto e = constant(stoch(0.2, 0.2));
  ProductTrajectory t(e, RngStream(4, 0));
  t.advance(10);
  CHECK(check_decomposition(t) <= 1e-9);
}

TEST_CASE("cesaro examples") {
  const auto single = constant(stoch(0.3, 0.1));
  const auto c1 = cesaro(single, RngStream(1, 0), 1000, CesaroTarget::kTheta);
  CHECK((c1.value.col(0) - single.atoms().front()->decomposition.psi).norm() < 1e-12);

  const auto e = two_atoms();
  const std::size_t n = 100000;
  const double band = 5.0 / std::sqrt(static_cast<double>(n));
  const ComplexVector theta = std::sqrt(2.0) * vec({0.5, 0.5});
  const auto c2 = cesaro(e, RngStream(5, 0), n, CesaroTarget::kTheta);
  CHECK((c2.value.col(0) - theta).norm() <= band);
  const auto c3 = cesaro(e, RngStream(5, 0), n, CesaroTarget::kPsiProduct);
  CHECK(linalg::operator_norm(c3.value - linalg::outer(kPsi2, theta)) <= band);
}

TEST_CASE("decay_fit examples") {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m << 1, 0, 0, 0, 0.6, 0.2, 0, 0, 0.3;
  const Rrdo r(m, vec({1, 0, 0}), NormDescriptor::euclidean());
  const auto e = constant(r);
  REQUIRE(e.atoms().front()->decomposition.sr_mq == doctest::Approx(0.6));
  ProductTrajectory t(e, RngStream(1, 0));
  t.advance(100);
  const auto fit = decay_fit(t, 50);
  REQUIRE(fit.alpha_hat);
  CHECK(*fit.alpha_hat >= 0.49);
  CHECK(*fit.alpha_hat <= 0.53);
  CHECK(fit.onset_n0 >= 1);

  const Complex w = std::exp(Complex(0, 1.0));
  const Rrdo u(mat2(1, 0, 0, w), vec({1, 0}), NormDescriptor::euclidean());
  const auto eu = constant(u);
  ProductTrajectory tu(eu, RngStream(1, 0));
  tu.advance(100);
  const auto fu = decay_fit(tu, 50);
  CHECK(fu.r_squared < 0.9);
  CHECK_FALSE(fu.alpha_hat);
}

TEST_CASE("decay_fit survives underflow and flags annihilation") {
  const Rrdo r(mat2(1, 0, 0, 0), vec({1, 0}), NormDescriptor::euclidean());
  const auto e = constant(r);
  ProductTrajectory t(e, RngStream(1, 0));
  t.advance(10);
  CHECK(t.exact_annihilation());
  CHECK(decay_fit(t, 5).exact_annihilation);

  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m << 1, 0, 0, 1e-3;
  const auto tiny = constant(Rrdo(m, vec({1, 0}), NormDescriptor::euclidean()));
  ProductTrajectory tt(tiny, RngStream(1, 0));
  tt.advance(400);
  CHECK(tt.mq_product_norm_log().back() == doctest::Approx(400 * std::log(1e-3)).epsilon(1e-10));
  CHECK_FALSE(tt.exact_annihilation());
}

TEST_CASE("decay_fit: mixed ensemble with a rare M_E atom decays") {
  const double s = 1 / std::sqrt(3.0);
  const ComplexVector psi = vec({s, s, s});
  ComplexMatrix good(3, 3), idem(3, 3);
  good << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
  idem << 1, 0, 0, 0, 1, 0, 0, 1, 0;
  const auto e = MatrixEnsemble::finite({{Rrdo(good, psi, NormDescriptor::max_row_sum()), 0.1},
                                         {Rrdo(idem, psi, NormDescriptor::max_row_sum()), 0.9}});
  CHECK(e.atoms()[0]->decomposition.in_me);
  CHECK_FALSE(e.atoms()[1]->decomposition.in_me);
  for (std::uint64_t seed : {1, 2, 3}) {
    ProductTrajectory t(e, RngStream(seed, 0));
    t.advance(2000);
    const auto fit = decay_fit(t, 1000);
    REQUIRE(fit.alpha_hat);
    CHECK(*fit.alpha_hat > 0.0);
  }
}

TEST_CASE("forward_limit examples") {
  const auto single = constant(stoch(0.3, 0.1));
  const auto f1 = forward_limit(single, RngStream(1, 0), 200, 1e-10);
  CHECK(f1.converged);
  REQUIRE(f1.rank_one_limit);
  CHECK((*f1.limit - *f1.rank_one_limit).norm() < 1e-10);

  const auto bi = MatrixEnsemble::finite({{stoch(0.3, 0.3), 0.5}, {stoch(0.6, 0.6), 0.5}});
  const auto f2 = forward_limit(bi, RngStream(1, 0), 200, 1e-10);
  CHECK(f2.converged);
  CHECK((*f2.limit - linalg::outer(kPsi2, kPsi2)).norm() < 1e-10);

  const auto f3 = forward_limit(two_atoms(), RngStream(1, 0), 200, 1e-10);
  CHECK_FALSE(f3.converged);
  CHECK_FALSE(f3.limit);

  const Rrdo u(ComplexMatrix::Identity(2, 2), kPsi2, NormDescriptor::euclidean());
  CHECK(error_kind([&] { forward_limit(constant(u), RngStream(1, 0), 200, 1e-10); }) ==
        ErrorKind::kHypothesisViolated);
}

TEST_CASE("eta_infinity examples") {
  const auto single = constant(stoch(0.3, 0.1));
  ProductTrajectory t(single, RngStream(1, 0));
  const auto& dec = single.atoms().front()->decomposition;
  const ComplexMatrix geom = (ComplexMatrix::Identity(2, 2) - dec.m_q.adjoint()).inverse();
  CHECK((eta_infinity(t, 1e-14, 1000) - geom * dec.psi).norm() < 1e-12);
  CHECK((eta_infinity(t, 1e-14, 1000) - dec.psi).norm() < 1e-12);

  const auto bi = MatrixEnsemble::finite({{stoch(0.3, 0.3), 0.5}, {stoch(0.6, 0.6), 0.5}});
  ProductTrajectory tb(bi, RngStream(1, 0));
  CHECK((eta_infinity(tb, 1e-14, 1000) - kPsi2).norm() < 1e-12);

  // Slow mixing: increments stay far above tol within the step budget.
  const auto slow = MatrixEnsemble::finite({{stoch(0.01, 0.02), 0.5}, {stoch(0.02, 0.01), 0.5}});
  ProductTrajectory tu(slow, RngStream(1, 0));
  CHECK(error_kind([&] { eta_infinity(tu, 1e-14, 50); }) == ErrorKind::kNotConverged);
}

TEST_CASE("lyapunov examples") {
  const auto id = constant(Rrdo(ComplexMatrix::Identity(3, 3), vec({1, 0, 0}), NormDescriptor::euclidean()));
  for (double x : lyapunov(id, 100, RngStream(1, 0)).exponents) CHECK(std::abs(x) < 1e-14);

  const auto st = constant(stoch(0.3, 0.1));
  const auto rep = lyapunov(st, 2000, RngStream(1, 0));
  CHECK(std::abs(rep.exponents[0]) < 1e-3);
  CHECK(rep.exponents[1] == doctest::Approx(std::log(0.6)).epsilon(1e-3 / std::log(1 / 0.6)));
  CHECK(rep.top_multiplicity_gap > 0.5);

  const auto zero = constant(Rrdo(mat2(1, 0, 0, 0), vec({1, 0}), NormDescriptor::euclidean()));
  CHECK(std::isinf(lyapunov(zero, 100, RngStream(1, 0)).exponents[1]));
}
