#include <benchmark/benchmark.h>

#include "rrdo/markov.hpp"
#include "rrdo/products.hpp"
#include "rrdo/spin.hpp"

using namespace rrdo;

static void BM_DirichletStep(benchmark::State& state) {
  const auto e = markov::dirichlet_ensemble(static_cast<Eigen::Index>(state.range(0)), 1.0);
  ProductTrajectory t(e, RngStream(1, 0));
  for (auto _ : state) {
    t.step();
    benchmark::DoNotOptimize(t.theta_n().data());
  }
}
BENCHMARK(BM_DirichletStep)->Arg(3)->Arg(8)->Arg(16);

static void BM_SpinFiniteStep(benchmark::State& state) {
  const auto e = spin::finite_ensemble({{{1, 0.4, 1, 0.1, 1}, 0.5}, {{1, 0.6, 1, 0.1, 1}, 0.5}});
  ProductTrajectory t(e, RngStream(1, 0));
  for (auto _ : state) {
    t.step();
    benchmark::DoNotOptimize(t.theta_n().data());
  }
}
BENCHMARK(BM_SpinFiniteStep);

static void BM_BuildM(benchmark::State& state) {
  const spin::SpinParams p{1, 0.5, 1, 0.1, 1};
  for (auto _ : state) benchmark::DoNotOptimize(spin::build_m(p).matrix.data());
}
BENCHMARK(BM_BuildM);

static void BM_MatrixExp(benchmark::State& state) {
  const auto g = spin::build_gns({1, 0.5, 1, 0.1, 1});
  const ComplexMatrix a = Complex(0, 1) * g.k_gen;
  for (auto _ : state) benchmark::DoNotOptimize(linalg::matrix_exp(a).data());
}
BENCHMARK(BM_MatrixExp);

static void BM_Riesz(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  RngStream rng(2, 0);
  const Eigen::MatrixXd m = markov::sample_dirichlet(d, 1.0, rng).entries();
  const ComplexMatrix mc = m.cast<Complex>();
  for (auto _ : state) benchmark::DoNotOptimize(linalg::riesz_projector(mc, 1.0, 1e-8).projector.data());
}
BENCHMARK(BM_Riesz)->Arg(3)->Arg(16)->Arg(64);

static void BM_Lyapunov(benchmark::State& state) {
  const auto e = markov::dirichlet_ensemble(4, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov(e, 1000, RngStream(3, 0)).exponents.data());
}
BENCHMARK(BM_Lyapunov);
BENCHMARK_MAIN();
