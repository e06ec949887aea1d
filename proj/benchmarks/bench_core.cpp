// Microbenchmarks for the hot paths: the continuity solve behind every
// metric-derivative evaluation, kernel assembly, projected-chain
// construction, and the matrix exponential inside the layered runner.

#include <random>

#include <benchmark/benchmark.h>

#include "ota/annealing.hpp"
#include "ota/ising.hpp"
#include "ota/markov.hpp"
#include "ota/potts.hpp"
#include "ota/transport.hpp"

namespace {

ota::ReversiblePair complete_pair(int count, unsigned seed) {
  const ota::StateGraphPtr g = ota::StateGraph::complete(count);
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  Eigen::VectorXd pi(count);
  for (int i = 0; i < count; ++i) pi(i) = unif(gen);
  pi /= pi.sum();
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(count, count);
  for (const auto& e : g->edges()) {
    const double c = 0.1 * unif(gen);
    rates(e.lo, e.hi) = c / pi(e.lo);
    rates(e.hi, e.lo) = c / pi(e.hi);
  }
  rates.diagonal() = -rates.rowwise().sum();
  return ota::make_reversible_pair(ota::RateKernel(g, rates),
                                   ota::ProbVector(pi));
}

void BM_solve_continuity_potential(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  const ota::ReversiblePair pair = complete_pair(count, 7);
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd r(count);
  for (int i = 0; i < count; ++i) r(i) = unif(gen);
  r.array() -= r.mean();
  const ota::MassRate rate(r);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ota::solve_continuity_potential(pair.capacity, rate, pair.stationary));
  }
}
BENCHMARK(BM_solve_continuity_potential)->Arg(16)->Arg(64)->Arg(256);

void BM_glauber_kernel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ota::ProbVector pi = ota::ising_distribution(n, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ota::glauber_kernel(pi));
  }
}
BENCHMARK(BM_glauber_kernel)->Arg(6)->Arg(8)->Arg(10);

void BM_block_glauber_kernel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ota::ProbVector pi = ota::potts_distribution(n, 3, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ota::block_glauber_kernel(pi, 3));
  }
}
BENCHMARK(BM_block_glauber_kernel)->Arg(5)->Arg(7);

void BM_projected_potts_chain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ota::projected_potts_chain(n, 3, 1.5, true));
  }
}
// The unfolded intermediate is a dense O(n^2) x O(n^2) matrix at q = 3, so
// n = 256 would need ~9 GB; stop at 64.
BENCHMARK(BM_projected_potts_chain)->Arg(16)->Arg(32)->Arg(64);

void BM_run_exact_layer(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto rates = [n](double s) {
    return ota::glauber_kernel(ota::ising_distribution(n, s));
  };
  ota::AnnealConfig config;
  config.T = 1.0;
  config.N = 16;
  const ota::ProbVector mu0 = ota::ProbVector::uniform(1 << n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ota::run_exact(rates, config, mu0));
  }
}
BENCHMARK(BM_run_exact_layer)->Arg(4)->Arg(6)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
