#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "ota/errors.hpp"
#include "ota/markov.hpp"

using namespace ota;

namespace {

// Reversible pair on a given graph: random positive pi and capacities,
// rates k(x,y) = c(x,y) / pi(x).
ReversiblePair random_pair(StateGraphPtr graph, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> unif(0.2, 1.8);
  const int n = graph->num_states();
  Eigen::VectorXd raw(n);
  for (int i = 0; i < n; ++i) raw(i) = unif(gen);
  ProbVector pi = ProbVector::normalized(raw);
  Eigen::VectorXd cap(graph->num_edges());
  for (int e = 0; e < graph->num_edges(); ++e) cap(e) = 0.1 * unif(gen);
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < graph->num_edges(); ++e) {
    const auto& ed = graph->edges()[static_cast<std::size_t>(e)];
    rates(ed.lo, ed.hi) = cap(e) / pi(ed.lo);
    rates(ed.hi, ed.lo) = cap(e) / pi(ed.hi);
  }
  for (int i = 0; i < n; ++i) rates(i, i) = -rates.row(i).sum();
  return make_reversible_pair(RateKernel(std::move(graph), std::move(rates)),
                              std::move(pi));
}

ReversiblePair two_state_pair() {
  // pi = (0.6, 0.4), capacity 0.24, so k01 = 0.4 and k10 = 0.6.
  const StateGraphPtr g = StateGraph::path(2);
  Eigen::MatrixXd rates(2, 2);
  rates << -0.4, 0.4, 0.6, -0.6;
  Eigen::VectorXd pi(2);
  pi << 0.6, 0.4;
  return make_reversible_pair(RateKernel(g, rates), ProbVector(pi));
}

}  // namespace

TEST_SUITE("markov") {

TEST_CASE("RateKernel validation") {
  const StateGraphPtr g = StateGraph::path(3);
  Eigen::MatrixXd ok(3, 3);
  ok << -1, 1, 0, 2, -3, 1, 0, 4, -4;
  CHECK_NOTHROW(RateKernel(g, ok));

  Eigen::MatrixXd negative = ok;
  negative(0, 1) = -1.0;
  CHECK_THROWS_AS(RateKernel(g, negative), InvalidArgument);

  Eigen::MatrixXd rowsum = ok;
  rowsum(0, 0) = -2.0;
  CHECK_THROWS_AS(RateKernel(g, rowsum), InvalidArgument);

  Eigen::MatrixXd offgraph = Eigen::MatrixXd::Zero(3, 3);
  offgraph(0, 2) = 1.0;
  offgraph(0, 0) = -1.0;
  CHECK_THROWS_AS(RateKernel(g, offgraph), InvalidArgument);
}

TEST_CASE("capacity_from_kernel inverts the construction") {
  const ReversiblePair pair = random_pair(StateGraph::complete(5), 21);
  const auto& g = pair.kernel.graph();
  for (int e = 0; e < g->num_edges(); ++e) {
    const auto& ed = g->edges()[static_cast<std::size_t>(e)];
    CHECK(pair.capacity.weight(e) ==
          doctest::Approx(pair.stationary(ed.lo) *
                          pair.kernel(ed.lo, ed.hi)).epsilon(1e-12));
  }

  // Broken detailed balance is refused.
  const StateGraphPtr g2 = StateGraph::path(2);
  Eigen::MatrixXd rates(2, 2);
  rates << -0.4, 0.4, 0.6, -0.6;
  Eigen::VectorXd pi(2);
  pi << 0.5, 0.5;
  CHECK_THROWS_AS(capacity_from_kernel(RateKernel(g2, rates), ProbVector(pi)),
                  NotReversible);
}

TEST_CASE("dirichlet_form oracle and generator identity") {
  const ReversiblePair pair = two_state_pair();
  Eigen::VectorXd f(2);
  f << 0.0, 1.0;
  CHECK(dirichlet_form(pair.capacity, f, f) ==
        doctest::Approx(0.24).epsilon(1e-14));
  Eigen::VectorXd g(2);
  g << 0.0, 2.0;
  CHECK(dirichlet_form(pair.capacity, f, g) ==
        doctest::Approx(0.48).epsilon(1e-14));

  // E(f, g) = <f, -L g>_pi on a random reversible instance.
  const ReversiblePair p2 = random_pair(StateGraph::complete(6), 5);
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd a(6), b(6);
  for (int i = 0; i < 6; ++i) {
    a(i) = unif(gen);
    b(i) = unif(gen);
  }
  const Eigen::VectorXd minus_lb = -(p2.kernel.matrix() * b);
  const double inner =
      (p2.stationary.vec().array() * a.array() * minus_lb.array()).sum();
  CHECK(dirichlet_form(p2.capacity, a, b) ==
        doctest::Approx(inner).epsilon(1e-10));
}

TEST_CASE("evolve_fokker_planck matches the two-state closed form") {
  const ReversiblePair pair = two_state_pair();
  Eigen::VectorXd m0(2);
  m0 << 0.9, 0.1;
  const ProbVector mu0(m0);
  // mu_t(0) = 0.6 + (0.9 - 0.6) e^{-t}; rates 0.4 / 0.6 relax at rate 1.
  const std::vector<KernelPiece> pieces = {{0.4, &pair.kernel},
                                           {0.6, &pair.kernel}};
  const EvolveResult r = evolve_fokker_planck(mu0, pieces);
  CHECK(r.marginal(0) == doctest::Approx(0.7103638323514327).epsilon(1e-12));
  CHECK(r.mass_drift < 1e-12);
}

TEST_CASE("kl and chi2 oracles") {
  Eigen::VectorXd mu(2), nu(2);
  mu << 0.5, 0.5;
  nu << 0.25, 0.75;
  CHECK(kl(mu, nu) == doctest::Approx(0.14384103622589042).epsilon(1e-14));
  CHECK(chi2(mu, nu) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(kl(mu, mu) == 0.0);
  CHECK(chi2(nu, nu) == 0.0);

  Eigen::VectorXd boundary(2), target(2);
  boundary << 1.0, 0.0;
  target << 0.5, 0.5;
  CHECK(kl(boundary, target) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(kl(target, boundary), AbsoluteContinuity);
}

TEST_CASE("entropy and variance functionals") {
  const ProbVector pi = ProbVector::uniform(2);
  Eigen::VectorXd f(2);
  f << 1.0, 3.0;
  CHECK(variance_functional(pi, f) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(entropy_functional(pi, f) ==
        doctest::Approx(0.261624071882274).epsilon(1e-12));
  // Ent[f] vanishes exactly on constants.
  Eigen::VectorXd c = Eigen::VectorXd::Constant(2, 1.7);
  CHECK(entropy_functional(pi, c) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("poincare_constant closed forms") {
  CHECK(poincare_constant(two_state_pair()) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Uniform pi, unit capacities: K3 relaxes three times faster than P3.
  const auto uniform_pair = [](StateGraphPtr g) {
    const int n = g->num_states();
    Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
    for (const auto& ed : g->edges()) {
      rates(ed.lo, ed.hi) = n;
      rates(ed.hi, ed.lo) = n;
    }
    for (int i = 0; i < n; ++i) rates(i, i) = -rates.row(i).sum();
    return make_reversible_pair(RateKernel(g, rates), ProbVector::uniform(n));
  };
  CHECK(poincare_constant(uniform_pair(StateGraph::complete(3))) ==
        doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(poincare_constant(uniform_pair(StateGraph::path(3))) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("poincare inequality is tight on random instances") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (unsigned seed : {10u, 11u, 12u}) {
    const ReversiblePair pair = random_pair(StateGraph::complete(5), seed);
    const double c_pi = poincare_constant(pair);
    double best = 0.0;
    for (int trial = 0; trial < 400; ++trial) {
      Eigen::VectorXd f(5);
      for (int i = 0; i < 5; ++i) f(i) = unif(gen);
      const double energy = dirichlet_form(pair.capacity, f, f);
      if (energy < 1e-12) continue;
      best = std::max(best, variance_functional(pair.stationary, f) / energy);
    }
    CHECK(best <= c_pi * (1.0 + 1e-9));
    CHECK(best > 0.3 * c_pi);  // random probes land near the extremal ratio
  }
}

TEST_CASE("mlsi grid certifies the entropy inequality") {
  const ReversiblePair pair = two_state_pair();
  const MlsiReport grid = mlsi_constant(pair, MlsiMode::ExactGrid, 400, 1);
  const MlsiReport ascent = mlsi_constant(pair, MlsiMode::Ascent, 400, 1);
  CHECK(grid.value > 0.0);
  CHECK(ascent.value <= grid.value * (1.0 + 1e-6));

  std::mt19937 gen(17);
  std::uniform_real_distribution<double> unif(0.05, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::VectorXd f(2);
    f << unif(gen), unif(gen);
    const Eigen::VectorXd logf = f.array().log();
    const double ent = entropy_functional(pair.stationary, f);
    const double energy = dirichlet_form(pair.capacity, logf, f);
    CHECK(ent <= grid.value * energy * (1.0 + 1e-6) + 1e-12);
  }

  const ReversiblePair big = random_pair(StateGraph::complete(5), 2);
  CHECK_THROWS_AS(mlsi_constant(big, MlsiMode::ExactGrid), TooLargeForGrid);
}

TEST_CASE("canonical paths congestion") {
  // P3, uniform pi, unit capacities: both routed edges carry weight
  // 1*(1/9) + 2*(1/9) = 1/3, which also equals the exact constant.
  const StateGraphPtr g = StateGraph::path(3);
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(3, 3);
  for (const auto& ed : g->edges()) {
    rates(ed.lo, ed.hi) = 3.0;
    rates(ed.hi, ed.lo) = 3.0;
  }
  for (int i = 0; i < 3; ++i) rates(i, i) = -rates.row(i).sum();
  const ReversiblePair pair =
      make_reversible_pair(RateKernel(g, rates), ProbVector::uniform(3));
  PathMap paths;
  paths[{0, 1}] = {0, 1};
  paths[{1, 2}] = {1, 2};
  paths[{0, 2}] = {0, 1, 2};
  const double congestion = canonical_paths_congestion(pair, paths);
  CHECK(congestion == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(congestion >= poincare_constant(pair) - 1e-12);

  PathMap missing = paths;
  missing.erase({0, 2});
  CHECK_THROWS_AS(canonical_paths_congestion(pair, missing), InvalidArgument);
  PathMap broken = paths;
  broken[{0, 2}] = {0, 2};
  CHECK_THROWS_AS(canonical_paths_congestion(pair, broken), BrokenPath);
}

TEST_CASE("congestion dominates the exact constant on random instances") {
  for (unsigned seed : {31u, 32u, 33u, 34u}) {
    const ReversiblePair pair = random_pair(StateGraph::complete(4), seed);
    PathMap paths;
    for (int x = 0; x < 4; ++x)
      for (int y = x + 1; y < 4; ++y) paths[{x, y}] = {x, y};
    CHECK(canonical_paths_congestion(pair, paths) >=
          poincare_constant(pair) - 1e-12);
  }
}

}  // TEST_SUITE
