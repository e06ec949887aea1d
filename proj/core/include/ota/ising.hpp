#pragma once

#include <string>
#include <vector>

#include "ota/annealing.hpp"
#include "ota/graph.hpp"
#include "ota/markov.hpp"
#include "ota/symmetry.hpp"

namespace ota {

// Curie-Weiss model on {-1,+1}^n with Hamiltonian -M^2/(2n). States are
// bit-indexed: bit i set means spin i is +1.

// mu_beta(sigma) propto exp(beta M(sigma)^2 / (2n)), n <= 12.
ProbVector ising_distribution(int n, double beta);

// Hypercube graph on 2^n states (single spin flips), n <= 12.
StateGraphPtr ising_graph(int n);

// M(sigma) = #(+1) - #(-1).
int ising_magnetization(int n, int state);

// Single-site Glauber rates p(sigma, sigma^i) = (1/n) pi' / (pi + pi'),
// verified reversible. pi must live on a full spin space (size 2^n).
RateKernel glauber_kernel(const ProbVector& pi);

// Birth-death chain of the total magnetization, with exact closed-form
// capacities. Unfolded states are m = -n, -n+2, ..., n; the folded variant
// quotients by the spin flip (states |m|, multiplicities r).
struct ProjectedIsingChain {
  int n = 0;
  double beta = 0.0;
  bool folded = false;
  StateGraphPtr graph;           // path graph over magnetization classes
  std::vector<int> m_values;     // magnetization per state, ascending
  Eigen::VectorXd multiplicity;  // r(m); all ones when unfolded
  ProbVector measure;
  Capacity capacity;
  RateKernel kernel;  // rates c(m,m') / pi(m)
};

ProjectedIsingChain projected_chain(int n, double beta, bool folded);

// Full spin space -> magnetization chain (label (M+n)/2).
Projection magnetization_projection(int n);
// Unfolded magnetization chain -> folded |m| classes.
Projection folding_projection(int n);

enum class LandscapeKind { Increasing, Decreasing, Unimodal };

struct LandscapeReport {
  LandscapeKind kind = LandscapeKind::Decreasing;
  int mode_m = 0;           // argmax of pi-bar over m >= 0
  bool trichotomy_ok = false;
  bool regime_bounds_ok = false;  // regime-specific guarantees, see detail
  std::string detail;
};

// Shape of m -> pi-bar(m) on m >= 0. Checked guarantees: decreasing when
// beta <= 1 - 1/n; pi-bar(m) < e * pi-bar(m0) when beta < 1; mode location
// m* > n sqrt(1 - 1/beta) when beta >= 1.
LandscapeReport landscape_classify(int n, double beta);

// d/ds log pi-folded as a function on folded states:
// m -> (beta'/(2n)) (m^2 - E[m^2]).
Eigen::VectorXd dlog_folded_measure(int n, double beta, double beta_prime);

struct IsingPipelineOptions {
  bool action_based_T = false;  // T = 2A/eps instead of 2 n^5 beta^2 / eps
  int grid_nodes = 201;
  double T_override = 0.0;
  long long N_override = 0;
  int delta_probes = 256;
  bool skip_exact_run = false;
};

struct IsingPipelineReport {
  int n = 0;
  double beta = 0.0;
  double eps = 0.0;
  double action = 0.0;
  double action_refinement = 0.0;
  double action_bound = 0.0;  // n^5 beta^2 / 16
  double T = 0.0;
  long long N = 1;
  double eta = 0.0;
  double delta_measured = 0.0;
  double kl0 = 0.0;
  double kl_final = 0.0;
  double bound = 0.0;
  bool exact_run = false;  // full-space verification performed (n <= 12)
  bool pass = false;
  bool bound_holds = false;
  double elapsed_seconds = 0.0;
};

// Linear schedule beta(s) = beta_target * s: folded-chain action, horizon
// T and layer count N, and (for n <= 12) the end-to-end exact KL of the
// layered algorithm on the full spin space.
IsingPipelineReport ising_pipeline(int n, double beta_target, double eps,
                                   const IsingPipelineOptions& options = {});

}  // namespace ota
