#include "ota/rng.hpp"

#include <cmath>

#include "ota/errors.hpp"

namespace ota {

namespace {

// splitmix64 finalizer (Steele, Lea, Flood 2014); standard 64-bit mixer.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t replicate,
                       std::uint64_t layer) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ mix64(replicate + 0x8E9B5DDE6A41F2CBULL));
  k = mix64(k ^ mix64(layer + 0xD1B54A32D192ED03ULL));
  key_ = k;
}

std::uint64_t CounterRng::next_u64() {
  return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::poisson(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("CounterRng::poisson: lambda must be finite and >= 0");
  }
  if (lambda == 0.0) return 0;
  if (lambda <= 30.0) {
    // Inversion by sequential search.
    double p = std::exp(-lambda);
    double cum = p;
    double u = next_double();
    std::uint64_t k = 0;
    while (u > cum) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cum += p;
      if (k > 2000) break;  // cum has saturated in double precision
    }
    return k;
  }
  // PTRS transformed rejection (Hoermann 1993), exact for lambda > 10.
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    double u = next_double() - 0.5;
    double v = next_double();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        -lambda + k * log_lambda - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace ota
