#pragma once

#include <functional>
#include <vector>

#include "ota/graph.hpp"
#include "ota/markov.hpp"

namespace ota {

// Psi(r) = r log r - r + 1, the convex integrand of the path-space KL;
// Psi(0) = 1 by limit. Throws NegativeRate for r < 0.
double psi(double r);

// rho arcsinh(rho/2) - 2 sqrt(1 + rho^2/4) + 2: the per-edge KL cost of the
// optimal reference chain. Even in rho and bounded by rho^2/4.
double edge_kl_cost(double rho);

// The optimal reference kernel for a given flux: on each edge with
// rho = J(x,y)/c(x,y),
//   q(x,y) = p(x,y) (sqrt(1 + rho^2/4) + rho/2),
//   q(y,x) = p(y,x) (sqrt(1 + rho^2/4) - rho/2),
// diagonal restored to zero row sums. Satisfies q/p(x,y) - q/p(y,x) = rho
// exactly. Zero-capacity edges must carry zero flux (ZeroCapacityEdge) and
// keep q = p there.
RateKernel reference_kernel(const RateKernel& p, const Capacity& capacity,
                            const Flux& flux);

struct PathKlOptions {
  // The path-space formula assumes uniformly bounded rates; probed rates
  // above the cap are rejected.
  double rate_cap = 1e6;
};

using KernelSchedule = std::function<RateKernel(double)>;
using MarginalSchedule = std::function<ProbVector(double)>;

// KL between the path measures of two jump chains over the time grid:
//   init_kl + integral of sum_x mu_t(x) sum_{y != x} [p log(p/q) - (p - q)]
// by composite Simpson on the (uniform, odd) grid. mu_sched evaluates the
// p-chain marginal. Throws SupportMismatch where p > 0 but q = 0 and
// RateCapExceeded past options.rate_cap. If refinement_error is non-null it
// receives the half-resolution quadrature gap.
double path_kl(const KernelSchedule& p_sched, const KernelSchedule& q_sched,
               const MarginalSchedule& mu_sched, double init_kl,
               const std::vector<double>& time_grid,
               const PathKlOptions& options = {},
               double* refinement_error = nullptr);

}  // namespace ota
