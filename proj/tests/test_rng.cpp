#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "ota/rng.hpp"

using namespace ota;

TEST_SUITE("rng") {

TEST_CASE("streams are pure functions of (seed, replicate, layer)") {
  CounterRng a(42, 3, 7);
  CounterRng b(42, 3, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng c(42, 3, 8);
  CounterRng d(42, 4, 7);
  CounterRng e(43, 3, 7);
  CounterRng base(42, 3, 7);
  int diff_layer = 0;
  int diff_rep = 0;
  int diff_seed = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t r = base.next_u64();
    diff_layer += r != c.next_u64();
    diff_rep += r != d.next_u64();
    diff_seed += r != e.next_u64();
  }
  CHECK(diff_layer > 60);
  CHECK(diff_rep > 60);
  CHECK(diff_seed > 60);
}

TEST_CASE("next_double lies in [0,1) and has the right mean") {
  CounterRng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // mean 0.5, sd of the mean = 1/sqrt(12*20000) ~ 0.002
  CHECK(std::abs(sum / 20000 - 0.5) < 0.01);
}

TEST_CASE("poisson matches its first two moments, both regimes") {
  for (const double lambda : {0.7, 4.0, 80.0}) {
    CounterRng rng(11, 0, static_cast<std::uint64_t>(lambda * 10));
    const int draws = 20000;
    double sum = 0.0;
    double sumsq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double k = static_cast<double>(rng.poisson(lambda));
      sum += k;
      sumsq += k * k;
    }
    const double mean = sum / draws;
    const double var = sumsq / draws - mean * mean;
    const double mean_sd = std::sqrt(lambda / draws);
    CHECK(std::abs(mean - lambda) < 5 * mean_sd);
    CHECK(std::abs(var - lambda) < 0.1 * lambda + 5 * mean_sd);
  }
}

TEST_CASE("poisson(0) is identically zero") {
  CounterRng rng(5);
  for (int i = 0; i < 50; ++i) CHECK(rng.poisson(0.0) == 0);
}

}  // TEST_SUITE
