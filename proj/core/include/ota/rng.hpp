#pragma once

#include <cstdint>

namespace ota {

// Counter-based generator: every draw is a pure function of
// (seed, replicate, layer, counter), so replicate r of layer k produces the
// same stream no matter how the surrounding loops are ordered or batched.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t replicate = 0,
             std::uint64_t layer = 0);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double next_double();
  // Poisson(lambda) via inversion for small lambda, PTRS otherwise.
  std::uint64_t poisson(double lambda);

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ota
