#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ota/graph.hpp"
#include "ota/markov.hpp"

namespace ota {

// Inverse-temperature schedule on [0, 1] with an explicit derivative.
class Schedule {
public:
  enum class Kind { LinearUp, LinearDown, Custom };

  // beta(s) = beta_end * s.
  static Schedule linear_up(double beta_end);
  // beta(s) = beta0 - (beta0 - beta1) * s.
  static Schedule linear_down(double beta0, double beta1);
  // Custom evaluators; the derivative is validated against central finite
  // differences (1e-8) and beta >= 0 on a probe grid.
  static Schedule custom(std::function<double(double)> beta,
                         std::function<double(double)> beta_prime);

  double beta(double s) const { return beta_(s); }
  double beta_prime(double s) const { return beta_prime_(s); }
  Kind kind() const { return kind_; }

private:
  Schedule(Kind kind, std::function<double(double)> beta,
           std::function<double(double)> beta_prime)
      : kind_(kind), beta_(std::move(beta)),
        beta_prime_(std::move(beta_prime)) {}

  Kind kind_;
  std::function<double(double)> beta_;
  std::function<double(double)> beta_prime_;
};

struct AnnealConfig {
  double T = 0.0;          // time horizon
  long long N = 1;         // layers
  std::uint64_t seed = 0;
  int replicates = 1;
  // Optional per-layer cap on Poisson jump counts; when set, the reported
  // truncation probability bounds the total-variation penalty.
  std::optional<long long> max_jumps;
};

struct AnnealResult {
  std::vector<int> final_states;             // sampler mode
  std::optional<ProbVector> final_marginal;  // exact mode
  std::uint64_t total_jumps = 0;
  std::vector<std::uint64_t> per_layer_jumps;
  double elapsed_seconds = 0.0;
  double truncation_probability = 0.0;
  double mass_drift = 0.0;  // exact mode renormalization drift
  int max_squarings = 0;
};

using TransitionProvider = std::function<Eigen::MatrixXd(double)>;
using RateProvider = std::function<RateKernel(double)>;

// Algorithm: per replicate, draw X0 from `initial`; for k = 1..N set
// s_k = k/N, draw M_k ~ Pois(T/N) and apply P_{s_k} that many times.
// Deterministic given the seed; replicate streams are independent of
// evaluation order. Rows of P must sum to 1 within 1e-10
// (NonStochasticRow) and be supported on the graph plus diagonal.
AnnealResult run_sampler(const TransitionProvider& transition,
                         StateGraphPtr graph, const AnnealConfig& config,
                         const ProbVector& initial);

// The law of the sampler's output: a continuous-time chain with the
// piecewise-constant kernels p_{k/N} on layers of length T/N, integrated
// exactly layer by layer.
AnnealResult run_exact(const RateProvider& rates, const AnnealConfig& config,
                       const ProbVector& mu0);

// max over probed s and s' = clip(s +- eta) and edges of
// |p_{s'}(x,y)/p_s(x,y) - 1|. Throws ZeroRateEdge when exactly one of the
// two rates vanishes on an edge.
double local_stability(const RateProvider& family, double eta,
                       const std::vector<double>& probe_grid);

// Everything the bound verifier needs from a model: the target Gibbs curve
// with its kernels and capacities, an initial distribution for the
// algorithm, and the stability window eta(eps, T).
struct AnnealModel {
  std::string name;
  StateGraphPtr graph;
  std::function<ProbVector(double)> pi;
  std::function<RateKernel(double)> kernel;
  std::function<Capacity(double)> capacity;
  std::function<MassRate(double)> rate;  // optional analytic d/ds pi
  ProbVector init_alg;
  double init_kl;  // KL(pi(0) || init_alg); NaN means "compute it"
  std::function<double(double, double)> eta;  // (eps, T) -> window
};

struct ErrorBoundReport {
  double action = 0.0;
  double action_refinement = 0.0;
  double T = 0.0;
  long long N = 1;
  double eta = 0.0;
  double delta_measured = 0.0;
  double kl0 = 0.0;
  double kl_final = 0.0;
  double bound = 0.0;  // kl0 + (1 + delta) A / (4T) + 2 delta T
  double eps = 0.0;
  bool pass = false;         // kl_final <= eps
  bool bound_holds = false;  // kl_final <= bound
  double elapsed_seconds = 0.0;
};

struct VerifyOptions {
  int grid_nodes = 201;
  double T_override = 0.0;      // > 0 replaces 2 A / eps
  long long N_override = 0;     // > 0 replaces ceil(1 / eta)
  int delta_probes = 256;
};

// Computes the action of the model's curve, sets T = 2A/eps and N from the
// model's eta bound, runs the exact layered chain, and reports the final KL
// against both eps and the perturbation decomposition.
ErrorBoundReport verify_error_bound(const AnnealModel& model, double eps,
                                    const VerifyOptions& options = {});

}  // namespace ota
