#include <cmath>
#include <set>

#include "helpers.hpp"
#include "rrdo/ensemble.hpp"
#include "rrdo/markov.hpp"

using namespace rrdo;
using namespace testing;

namespace {

const ComplexVector kPsi2 = vec({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});

Rrdo stoch(double a, double b) { return Rrdo(stochastic2(a, b), kPsi2, NormDescriptor::max_row_sum()); }

MatrixEnsemble two_atoms(double w1 = 0.5) {
  return MatrixEnsemble::finite({{stoch(0.3, 0.1), w1}, {stoch(0.1, 0.3), 1.0 - w1}});
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(5, 3), b(5, 3), c(5, 4), d(6, 3);
  bool differs_c = false, differs_d = false;
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_c |= x != c.next_u64();
    differs_d |= x != d.next_u64();
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("rng stream is pinned") {
  // splitmix64 reference values for the stream key and first words.
  CHECK(splitmix64(0x9E3779B97F4A7C15ULL) == 0xe220a8397b1dcdafULL);
  RngStream r(0, 0);
  const std::uint64_t key = splitmix64(0ULL ^ splitmix64(0));
  CHECK(r.next_u64() == splitmix64(key + 0x9E3779B97F4A7C15ULL));
  CHECK(r.next_u64() == splitmix64(key + 2 * 0x9E3779B97F4A7C15ULL));
}

TEST_CASE("rng moments") {
  RngStream r(9, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sg = 0;
  for (int k = 0; k < n; ++k) {
    su += r.uniform();
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    sg += r.gamma(0.5);
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sg / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sample examples") {
  const auto single = MatrixEnsemble::finite({{stoch(0.3, 0.1), 1.0}});
  RngStream rng(1, 0);
  for (int k = 0; k < 10; ++k) CHECK(single.draw(rng)->index == 0);

  const auto first_only = two_atoms(1.0);
  for (int k = 0; k < 1000; ++k) CHECK(first_only.draw(rng)->index == 0);

  const auto fair = two_atoms(0.5);
  RngStream r2(77, 0);
  int hits = 0;
  for (int k = 0; k < 10000; ++k) hits += fair.draw(r2)->index == 0;
  CHECK(hits >= 4850);
  CHECK(hits <= 5150);
}

TEST_CASE("finite ensembles validate their atoms") {
  CHECK(error_kind([] { MatrixEnsemble::finite({{stoch(0.3, 0.1), 0.5}, {stoch(0.1, 0.3), 0.4}}); }) ==
        ErrorKind::kInvalidInput);
  CHECK(error_kind([] { MatrixEnsemble::finite({{stoch(0.3, 0.1), 1.5}, {stoch(0.1, 0.3), -0.5}}); }) ==
        ErrorKind::kInvalidInput);
  const Rrdo other(stochastic2(0.1, 0.3), vec({1, 0}), NormDescriptor::max_row_sum());
  CHECK(error_kind([&] { MatrixEnsemble::finite({{stoch(0.3, 0.1), 0.5}, {other, 0.5}}); }) ==
        ErrorKind::kInvalidInput);
}

TEST_CASE("parametric generator producing a non-RRDO is rejected with its report") {
  const auto e = MatrixEnsemble::parametric(
      "bad", [](RngStream&) { return Rrdo(2.0 * ComplexMatrix::Identity(2, 2), kPsi2, NormDescriptor::euclidean()); },
      kPsi2, NormDescriptor::euclidean());
  RngStream rng(1, 0);
  try {
    e.draw(rng);
    FAIL("expected SampleRejected");
  } catch (const SampleRejected& s) {
    CHECK(s.kind() == ErrorKind::kSampleRejected);
    CHECK_FALSE(s.report().passed());
  }
}

TEST_CASE("mean_matrix examples") {
  CHECK((MatrixEnsemble::finite({{stoch(0.3, 0.1), 1.0}}).mean_matrix() - stochastic2(0.3, 0.1)).norm() < 1e-15);
  CHECK((two_atoms().mean_matrix() - stochastic2(0.2, 0.2)).norm() < 1e-15);
  CHECK((two_atoms(1.0).mean_matrix() - stochastic2(0.3, 0.1)).norm() < 1e-15);
}

TEST_CASE("Monte Carlo mean of Dirichlet rows is uniform") {
  const auto e = markov::dirichlet_ensemble(3, 1.0);
  const auto est = e.mean_matrix_estimate(20000);
  const Eigen::MatrixXd dev = (est.mean.real().array() - 1.0 / 3.0).abs().matrix();
  CHECK((dev.array() <= 4.0 * est.std_error.array()).all());
  CHECK((est.mean * e.psi_s() - e.psi_s()).norm() < 1e-10);
}

TEST_CASE("theta_limit examples") {
  const auto single = MatrixEnsemble::finite({{stoch(0.3, 0.1), 1.0}});
  const auto t1 = single.theta_limit();
  CHECK((t1.theta - single.atoms().front()->decomposition.psi).norm() < 1e-12);

  const auto t2 = two_atoms().theta_limit();
  CHECK((t2.theta - std::sqrt(2.0) * vec({0.5, 0.5})).norm() < 1e-12);
  REQUIRE(t2.residual_crosscheck);
  CHECK(*t2.residual_crosscheck <= 1e-8);
  CHECK(t2.mean_in_me);
  CHECK(std::abs(linalg::inner(kPsi2, t2.theta) - 1.0) < 1e-8);
  CHECK((t2.mean_matrix * kPsi2 - kPsi2).norm() < 1e-10);

  // Bistochastic atoms.
  const auto bi = MatrixEnsemble::finite({{stoch(0.3, 0.3), 0.25}, {stoch(0.6, 0.6), 0.75}});
  CHECK((bi.theta_limit().theta - kPsi2).norm() < 1e-12);
}

TEST_CASE("theta_limit refuses a degenerate mean") {
  const auto e = MatrixEnsemble::finite({{Rrdo(ComplexMatrix::Identity(2, 2), kPsi2, NormDescriptor::euclidean()), 1.0}});
  CHECK(error_kind([&] { e.theta_limit(); }) == ErrorKind::kMeanNotInME);
}
