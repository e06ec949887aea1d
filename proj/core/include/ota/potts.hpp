#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ota/annealing.hpp"
#include "ota/graph.hpp"
#include "ota/markov.hpp"
#include "ota/symmetry.hpp"

namespace ota {

// Mean-field Potts model on [q]^n with weights exp((beta/n) sum_a M_a^2),
// where M_a counts the sites of color a. Full-space states are base-q
// digit strings (site i holds digit (state / q^i) % q); the full space is
// admitted only while q^n <= 2e5.

ProbVector potts_distribution(int n, int q, double beta);

// Edges join configurations differing in 1..q-1 sites (one block move).
StateGraphPtr potts_graph(int n, int q);

std::vector<int> potts_magnetization(int n, int q, int state);

// (q-1)-block heat-bath rates
// p(sigma,sigma') = sum_I (1/C(n,q-1)) pi(sigma') / sum_a pi(sigma^{I<-a}),
// verified reversible; exit rate <= 1.
RateKernel block_glauber_kernel(const ProbVector& pi, int q);

// Magnetization chain. Unfolded states are color-count vectors (sum n);
// the folded variant quotients by color permutations, keeping sorted
// (non-increasing) representatives with multiplicity r(m) = q!/prod(mult!).
struct ProjectedPottsChain {
  int n = 0;
  int q = 0;
  double beta = 0.0;
  bool folded = false;
  StateGraphPtr graph;
  std::vector<std::vector<int>> m_states;  // per state, sorted rep if folded
  Eigen::VectorXd multiplicity;            // r; all ones when unfolded
  ProbVector measure;
  Capacity capacity;
  RateKernel kernel;
};

ProjectedPottsChain projected_potts_chain(int n, int q, double beta,
                                          bool folded);

// Full space -> unfolded magnetization classes (for n with q^n within cap).
Projection potts_magnetization_projection(int n, int q);
// Unfolded magnetization chain -> sorted folded classes.
Projection potts_folding_projection(int n, int q);

// Diagonal slice p_t = mu-bar(n-(q-1)t, t, ..., t), t = 0..floor(n/q).
struct DiagonalLandscape {
  std::vector<double> log_weight;  // unnormalized log mu-bar per t
  int mode_t = 0;
  bool shape_ok = false;  // increasing / decreasing / unimodal
};

DiagonalLandscape potts_diagonal_landscape(int n, int q, double beta);

// Path from a sorted magnetization vector to the diagonal mode m*, staying
// inside the sorted sector. The result lists vertices (first = input);
// every hop is a single block move, the length is at most 2n edges, and
// mu-bar never drops below exp(-(q-1)) times its value at the start.
std::vector<std::vector<int>> potts_path_construction(
    int n, int q, double beta, const std::vector<int>& m);

struct TransportPlanEntry {
  int source = 0;
  int sink = 0;
  double mass = 0.0;
  std::vector<int> path;  // state indices, source -> sink
};

struct TransportPlan {
  std::vector<TransportPlanEntry> entries;
};

using PathProvider = std::function<std::vector<int>(int, int)>;

// Greedy source/sink matching: walks the negative and positive supports of
// D in ascending state order, ships min(|D(x)|, |D(y)|) along paths(x, y),
// and returns the summed flux. D + div J = 0 exactly.
std::pair<Flux, TransportPlan> greedy_flux(StateGraphPtr graph,
                                           const MassRate& D,
                                           const PathProvider& paths);

struct PottsActionReport {
  double exact = 0.0;  // transport action of the folded Gibbs curve
  double exact_refinement = 0.0;
  double constructive = 0.0;  // flux cost of the greedy path plan
  std::vector<double> grid;
  std::vector<double> exact_integrand;
  std::vector<double> constructive_integrand;
};

// Requires beta(s) >= q/2 on the whole grid. The constructive route pushes
// the derivative formula d/ds pi-bar = (beta'/n) pi-bar (H - E[H]) through
// greedy_flux over constructed paths; the exact route must come out below.
PottsActionReport potts_action(int n, int q, const Schedule& schedule,
                               int grid_nodes = 201);

struct PottsInit {
  double beta0 = 0.0;
  double eps = 0.0;
  double kl_value = 0.0;   // KL(mu_{beta0} || nu)
  double threshold = 0.0;  // eps / 3
  bool certified = false;
  double mass_on_monochromatic = 0.0;
  std::optional<ProbVector> nu;  // full space, when q^n within cap
};

// nu = (eps/6) Unif(Omega) + (1 - eps/6) Unif(monochromatic states) and
// beta0 = n log q + log(6/eps). The KL certificate is exact: by state
// enumeration when the full space fits, otherwise summed over
// magnetization fibers.
PottsInit potts_init(int n, int q, double eps);

struct PottsPipelineOptions {
  int grid_nodes = 201;
  double T_override = 0.0;
  long long N_override = 0;
  int delta_probes = 256;
  bool skip_full_run = false;
};

struct PottsPipelineReport {
  int n = 0;
  int q = 0;
  double beta0 = 0.0;
  double beta = 0.0;
  double eps = 0.0;
  double init_kl = 0.0;
  double action = 0.0;
  double action_refinement = 0.0;
  double T = 0.0;
  long long N = 1;
  double eta = 0.0;
  double delta_measured = 0.0;
  double kl_final_folded = 0.0;
  double kl_final_full = 0.0;  // NaN when the full space is out of cap
  double bound = 0.0;
  bool full_run = false;
  bool pass = false;
  bool bound_holds = false;
  double elapsed_seconds = 0.0;
};

// Reversed schedule beta(s) = beta0 - (beta0 - beta_target) s from the
// potts_init mixture; T = 2A/eps from the computed folded action, layers
// from eta = eps / (24 (q-1) |beta0 - beta| T). Runs the exact layered
// chain on the folded space, and on the full space when q^n fits.
PottsPipelineReport potts_pipeline(int n, int q, double beta_target,
                                   double eps,
                                   const PottsPipelineOptions& options = {});

}  // namespace ota
