#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "ota/errors.hpp"
#include "ota/ising.hpp"
#include "ota/markov.hpp"
#include "ota/symmetry.hpp"

using namespace ota;

namespace {

// path(4) collapsed to two classes {0,1} and {2,3}
Projection small_projection() {
  return Projection::build(StateGraph::path(4), {0, 0, 1, 1}, 2);
}

ProbVector random_measure(std::mt19937& gen, int n) {
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = unif(gen);
  return ProbVector(v / v.sum());
}

}  // namespace

TEST_SUITE("symmetry") {

TEST_CASE("build: fibers, labels, projected graph") {
  const Projection proj = small_projection();
  CHECK(proj.source()->num_states() == 4);
  CHECK(proj.projected()->num_states() == 2);
  CHECK(proj.projected()->num_edges() == 1);  // only (1,2) crosses
  CHECK(proj.label(0) == 0);
  CHECK(proj.label(3) == 1);
  REQUIRE(proj.fibers().size() == 2);
  CHECK(proj.fibers()[0] == std::vector<int>{0, 1});
  CHECK(proj.fibers()[1] == std::vector<int>{2, 3});

  const Projection id = Projection::identity(StateGraph::path(3));
  CHECK(id.projected()->num_states() == 3);
  CHECK(id.fibers()[1] == std::vector<int>{1});
}

TEST_CASE("build: rejects malformed label assignments") {
  auto g = StateGraph::path(4);
  CHECK_THROWS_AS(Projection::build(g, {0, 0, 1}, 2), InvalidArgument);
  CHECK_THROWS_AS(Projection::build(g, {0, 0, 1, 2}, 2), InvalidArgument);
  CHECK_THROWS_AS(Projection::build(g, {0, 0, 0, 0}, 2), InvalidArgument);
  CHECK_THROWS_AS(Projection::build(g, {0, 0, 1, 1}, 0), InvalidArgument);
}

TEST_CASE("pushforwards on a small chain") {
  const Projection proj = small_projection();

  Eigen::VectorXd m(4);
  m << 0.1, 0.2, 0.3, 0.4;
  const ProbVector mu = project_measure(proj, ProbVector(m));
  CHECK(mu(0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(mu(1) == doctest::Approx(0.7).epsilon(1e-15));

  Eigen::VectorXd r(4);
  r << 0.5, -0.2, -0.1, -0.2;
  const MassRate rbar = project_rate(proj, MassRate(r));
  CHECK(rbar(0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(rbar(1) == doctest::Approx(-0.3).epsilon(1e-15));

  Eigen::VectorXd w(3);
  w << 0.3, 0.5, 0.7;  // edges (0,1), (1,2), (2,3)
  const Capacity cbar =
      project_capacity(proj, Capacity(proj.source(), w));
  CHECK(cbar(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(project_vector(proj, Eigen::VectorXd::Zero(3)),
                  InvalidArgument);
}

TEST_CASE("magnetization symmetry holds for Glauber, breaks when perturbed") {
  const int n = 4;
  const ProbVector pi = ising_distribution(n, 0.8);
  const RateKernel kernel = glauber_kernel(pi);
  const Projection proj = magnetization_projection(n);

  const SymmetryReport ok = verify_symmetry(proj, pi, kernel);
  CHECK(ok.pass);
  CHECK(ok.worst_measure_deviation < 1e-12);
  CHECK(ok.worst_kernel_deviation < 1e-12);

  Eigen::VectorXd bumped = pi.vec();
  bumped(1) *= 1.05;  // state 1 sits in the M = -2 fiber of size 4
  const SymmetryReport bad =
      verify_symmetry(proj, ProbVector(bumped / bumped.sum()), kernel);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst_measure_deviation > 1e-3);
  CHECK(bad.worst_fiber >= 0);
}

TEST_CASE("metric derivative survives projection without loss") {
  const int n = 4;
  const double beta = 1.0;
  const ProbVector pi = ising_distribution(n, beta);
  const RateKernel kernel = glauber_kernel(pi);
  const Projection proj = magnetization_projection(n);

  // d/d beta of the Gibbs family: mu (E - <E>) with E = M^2 / 2n.
  Eigen::VectorXd energy(1 << n);
  for (int s = 0; s < (1 << n); ++s) {
    const double mm = ising_magnetization(n, s);
    energy(s) = mm * mm / (2.0 * n);
  }
  const double mean = pi.vec().dot(energy);
  const MassRate rate(
      pi.vec().cwiseProduct((energy.array() - mean).matrix()));

  const MetricGapReport gap =
      compare_metric_derivative(proj, pi, kernel, rate);
  CHECK(gap.symmetry.pass);
  CHECK(gap.full_value > 0.0);
  CHECK(gap.projected_value ==
        doctest::Approx(gap.full_value).epsilon(1e-8));
  CHECK(std::abs(gap.relative_gap) < 1e-8);

  // The closed-form magnetization capacity is the fiber sum in disguise.
  const ProjectedIsingChain bar = projected_chain(n, beta, false);
  const MetricGapReport gap2 =
      compare_metric_derivative(proj, pi, kernel, rate, &bar.capacity);
  CHECK(gap2.projected_value ==
        doctest::Approx(gap.projected_value).epsilon(1e-10));
}

TEST_CASE("projection contracts relative entropy") {
  const Projection proj = magnetization_projection(4);
  std::mt19937 gen(20240817);
  for (int trial = 0; trial < 50; ++trial) {
    const ProbVector mu = random_measure(gen, 16);
    const ProbVector nu = random_measure(gen, 16);
    const double full = kl(mu.vec(), nu.vec());
    const double coarse = kl(project_measure(proj, mu).vec(),
                             project_measure(proj, nu).vec());
    CHECK(coarse <= full + 1e-12);
  }
}

}  // TEST_SUITE
