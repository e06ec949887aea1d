#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ota/graph.hpp"

namespace ota {

// Continuous-time rate kernel on a StateGraph: off-diagonal entries are
// nonnegative jump rates supported on graph edges, rows sum to zero.
class RateKernel {
public:
  RateKernel(StateGraphPtr graph, Eigen::MatrixXd rates);

  const StateGraphPtr& graph() const { return graph_; }
  const Eigen::MatrixXd& matrix() const { return rates_; }
  double operator()(int x, int y) const { return rates_(x, y); }
  int num_states() const { return static_cast<int>(rates_.rows()); }

private:
  StateGraphPtr graph_;
  Eigen::MatrixXd rates_;
};

// A rate kernel together with its stationary distribution and the induced
// symmetric capacity c(x,y) = pi(x) p(x,y). Detailed balance is verified
// at construction.
struct ReversiblePair {
  RateKernel kernel;
  ProbVector stationary;
  Capacity capacity;
};

// Checks detailed balance pi(x)p(x,y) = pi(y)p(y,x) on every edge
// (relative tolerance 1e-10, absolute floor 1e-14) and returns the induced
// capacity. Throws NotReversible naming the worst edge.
Capacity capacity_from_kernel(const RateKernel& kernel, const ProbVector& pi);

ReversiblePair make_reversible_pair(RateKernel kernel, ProbVector pi);

// E(f, g) = sum over edges of (f(y)-f(x))(g(y)-g(x)) c(x,y), which equals
// the half-double-sum form and <f, -L g>_pi for reversible pairs.
double dirichlet_form(const Capacity& capacity, const Eigen::VectorXd& f,
                      const Eigen::VectorXd& g);

struct KernelPiece {
  double duration;
  const RateKernel* kernel;
};

struct EvolveResult {
  ProbVector marginal;
  double mass_drift;    // worst |sum - 1| seen before renormalization
  int max_squarings;    // scaling-and-squaring depth across pieces
};

// Exact marginal of d/dt mu_t = mu_t p_t for a piecewise-constant kernel
// schedule, via per-piece matrix exponentials. Output is renormalized and
// the drift reported. Throws StiffnessWarning past 60 squarings.
EvolveResult evolve_fokker_planck(const ProbVector& mu0,
                                  const std::vector<KernelPiece>& pieces);

// Divergences on raw vectors: boundary measures (entries equal to zero)
// are admitted read-only so initializer mixtures can be scored.
double kl(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);
double chi2(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);
// Ent_pi[f] = E_pi[f log f] - E_pi[f] log E_pi[f], for f >= 0.
double entropy_functional(const ProbVector& pi, const Eigen::VectorXd& f);
double variance_functional(const ProbVector& pi, const Eigen::VectorXd& f);

// Exact 1/gap of the capacity Laplacian generalized against diag(pi),
// computed as a symmetric eigenproblem after similarity transform.
double poincare_constant(const ReversiblePair& pair);

enum class MlsiMode { ExactGrid, Ascent };

struct MlsiReport {
  double value;
  double refinement_error;  // |value(R) - value(R/2)| in grid mode, else 0
  MlsiMode mode;
};

// Largest Ent_pi[f] / E(log f, f) found. ExactGrid enumerates the positive
// simplex at the given resolution (|Omega| <= 4 only, TooLargeForGrid
// otherwise) and then polishes; Ascent does multiplicative hill climbing
// from random restarts and is a lower-bound estimate. For a fixed seed the
// grid-mode search strictly contains the ascent-mode search.
MlsiReport mlsi_constant(const ReversiblePair& pair, MlsiMode mode,
                         int resolution = 400, std::uint64_t seed = 0);

// Unordered pair {x, y} with x < y mapped to the state sequence of a
// simple path from x to y.
using PathMap = std::map<std::pair<int, int>, std::vector<int>>;

// max over edges e of (1/c(e)) sum_{pairs routed through e} |path| pi(x)pi(y).
// Every unordered pair of distinct states must have a path. Returns +inf if
// a routed edge has zero capacity.
double canonical_paths_congestion(const ReversiblePair& pair,
                                  const PathMap& paths);

}  // namespace ota
