#include "ota/annealing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ota/errors.hpp"
#include "ota/linalg.hpp"
#include "ota/rng.hpp"
#include "ota/transport.hpp"

namespace ota {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

void check_config(const AnnealConfig& config) {
  if (!(config.T >= 0.0) || !std::isfinite(config.T))
    throw InvalidArgument("anneal: T must be finite and nonnegative");
  if (config.N < 1) throw InvalidArgument("anneal: N must be >= 1");
  if (config.replicates < 1)
    throw InvalidArgument("anneal: replicates must be >= 1");
  if (config.max_jumps && *config.max_jumps < 0)
    throw InvalidArgument("anneal: max_jumps must be >= 0");
}

// P[Pois(lambda) > cap], summed from the density to avoid cancellation.
double poisson_tail(double lambda, long long cap) {
  double term = std::exp(-lambda);
  double cdf = term;
  for (long long k = 1; k <= cap; ++k) {
    term *= lambda / static_cast<double>(k);
    cdf += term;
  }
  return std::max(0.0, 1.0 - cdf);
}

void check_transition_matrix(const Eigen::MatrixXd& P, const StateGraph& g,
                             double s) {
  const int n = g.num_states();
  if (P.rows() != n || P.cols() != n)
    throw InvalidArgument("run_sampler: transition matrix is " +
                          std::to_string(P.rows()) + "x" +
                          std::to_string(P.cols()) + ", expected " +
                          std::to_string(n));
  for (int x = 0; x < n; ++x) {
    double row = 0.0;
    for (int y = 0; y < n; ++y) {
      const double v = P(x, y);
      if (!std::isfinite(v) || v < 0.0)
        throw InvalidArgument("run_sampler: P(" + std::to_string(x) + "," +
                              std::to_string(y) + ") = " + std::to_string(v) +
                              " at s = " + std::to_string(s));
      if (x != y && v > 0.0 && !g.has_edge(x, y))
        throw InvalidArgument(
            "run_sampler: transition mass off the graph between states " +
            std::to_string(x) + " and " + std::to_string(y));
      row += v;
    }
    if (std::abs(row - 1.0) > 1e-10)
      throw NonStochasticRow("run_sampler: row " + std::to_string(x) +
                             " sums to " + std::to_string(row) + " at s = " +
                             std::to_string(s));
  }
}

int sample_row(const Eigen::MatrixXd& P, int x, double u) {
  const int n = static_cast<int>(P.cols());
  double acc = 0.0;
  for (int y = 0; y < n; ++y) {
    acc += P(x, y);
    if (u < acc) return y;
  }
  return n - 1;
}

int sample_initial(const ProbVector& initial, double u) {
  const int n = static_cast<int>(initial.vec().size());
  double acc = 0.0;
  for (int y = 0; y < n; ++y) {
    acc += initial.vec()(y);
    if (u < acc) return y;
  }
  return n - 1;
}

}  // namespace

Schedule Schedule::linear_up(double beta_end) {
  if (!std::isfinite(beta_end) || beta_end < 0.0)
    throw InvalidArgument("Schedule::linear_up: beta_end must be >= 0");
  return Schedule(Kind::LinearUp, [beta_end](double s) { return beta_end * s; },
                  [beta_end](double) { return beta_end; });
}

Schedule Schedule::linear_down(double beta0, double beta1) {
  if (!std::isfinite(beta0) || !std::isfinite(beta1) || beta0 < 0.0 ||
      beta1 < 0.0)
    throw InvalidArgument("Schedule::linear_down: endpoints must be >= 0");
  const double slope = beta1 - beta0;
  return Schedule(Kind::LinearDown,
                  [beta0, slope](double s) { return beta0 + slope * s; },
                  [slope](double) { return slope; });
}

Schedule Schedule::custom(std::function<double(double)> beta,
                          std::function<double(double)> beta_prime) {
  if (!beta || !beta_prime)
    throw InvalidArgument("Schedule::custom: null evaluator");
  // Probe away from the endpoints so the central stencil stays inside [0,1].
  const double h = 1e-6;
  for (int i = 0; i <= 100; ++i) {
    const double s = 0.001 + 0.998 * (i / 100.0);
    const double b = beta(s);
    if (!std::isfinite(b) || b < 0.0)
      throw InvalidArgument("Schedule::custom: beta(" + std::to_string(s) +
                            ") = " + std::to_string(b));
    const double fd = (beta(s + h) - beta(s - h)) / (2.0 * h);
    const double bp = beta_prime(s);
    if (std::abs(fd - bp) > 1e-8 * std::max(1.0, std::abs(bp)))
      throw InvalidArgument(
          "Schedule::custom: beta_prime inconsistent with finite differences "
          "at s = " +
          std::to_string(s) + " (" + std::to_string(bp) + " vs " +
          std::to_string(fd) + ")");
  }
  return Schedule(Kind::Custom, std::move(beta), std::move(beta_prime));
}

AnnealResult run_sampler(const TransitionProvider& transition,
                         StateGraphPtr graph, const AnnealConfig& config,
                         const ProbVector& initial) {
  if (!transition) throw InvalidArgument("run_sampler: null provider");
  if (!graph) throw InvalidArgument("run_sampler: null graph");
  check_config(config);
  if (initial.vec().size() != graph->num_states())
    throw InvalidArgument("run_sampler: initial distribution has size " +
                          std::to_string(initial.vec().size()));
  const double start = now_seconds();
  const double dt = config.T / static_cast<double>(config.N);
  const int R = config.replicates;

  AnnealResult result;
  result.final_states.resize(R);
  result.per_layer_jumps.assign(static_cast<std::size_t>(config.N), 0);
  for (int r = 0; r < R; ++r) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(r), 0);
    result.final_states[r] = sample_initial(initial, rng.next_double());
  }
  if (config.max_jumps)
    result.truncation_probability = std::min(
        1.0, static_cast<double>(config.N) *
                 poisson_tail(dt, *config.max_jumps) *
                 static_cast<double>(R));

  for (long long k = 1; k <= config.N; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(config.N);
    const Eigen::MatrixXd P = transition(s);
    check_transition_matrix(P, *graph, s);
    std::uint64_t layer_jumps = 0;
    for (int r = 0; r < R; ++r) {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(r),
                     static_cast<std::uint64_t>(k));
      std::uint64_t m = rng.poisson(dt);
      if (config.max_jumps &&
          m > static_cast<std::uint64_t>(*config.max_jumps))
        m = static_cast<std::uint64_t>(*config.max_jumps);
      int x = result.final_states[r];
      for (std::uint64_t j = 0; j < m; ++j)
        x = sample_row(P, x, rng.next_double());
      result.final_states[r] = x;
      layer_jumps += m;
    }
    result.per_layer_jumps[static_cast<std::size_t>(k - 1)] = layer_jumps;
    result.total_jumps += layer_jumps;
  }
  result.elapsed_seconds = now_seconds() - start;
  return result;
}

AnnealResult run_exact(const RateProvider& rates, const AnnealConfig& config,
                       const ProbVector& mu0) {
  if (!rates) throw InvalidArgument("run_exact: null provider");
  check_config(config);
  const double start = now_seconds();
  const double dt = config.T / static_cast<double>(config.N);

  Eigen::VectorXd mu = mu0.vec();
  AnnealResult result;
  for (long long k = 1; k <= config.N; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(config.N);
    const RateKernel kernel = rates(s);
    if (kernel.matrix().rows() != mu.size())
      throw InvalidArgument("run_exact: kernel size changed at s = " +
                            std::to_string(s));
    const Eigen::MatrixXd At = dt * kernel.matrix().transpose();
    const double norm1 = At.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 > 0.0) {
      const int squarings = static_cast<int>(
          std::max(0.0, std::ceil(std::log2(norm1 / 5.371920351148152))));
      if (squarings > 60)
        throw StiffnessWarning("run_exact: layer " + std::to_string(k) +
                               " needs " + std::to_string(squarings) +
                               " squarings");
      result.max_squarings = std::max(result.max_squarings, squarings);
    }
    mu = expm_apply(At, mu);
    const double mass = mu.sum();
    result.mass_drift = std::max(result.mass_drift, std::abs(mass - 1.0));
    if (!(mass > 0.0))
      throw SingularSolve("run_exact: marginal mass collapsed at s = " +
                          std::to_string(s));
    mu /= mass;
    for (int i = 0; i < mu.size(); ++i)
      if (mu(i) <= 0.0) mu(i) = std::numeric_limits<double>::min();
  }
  result.final_marginal = ProbVector::normalized(mu);
  result.elapsed_seconds = now_seconds() - start;
  return result;
}

double local_stability(const RateProvider& family, double eta,
                       const std::vector<double>& probe_grid) {
  if (!family) throw InvalidArgument("local_stability: null provider");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw InvalidArgument("local_stability: eta must be positive");
  if (probe_grid.empty())
    throw InvalidArgument("local_stability: empty probe grid");
  double worst = 0.0;
  for (double s : probe_grid) {
    if (s < 0.0 || s > 1.0)
      throw InvalidArgument("local_stability: probe outside [0,1]");
    const RateKernel base = family(s);
    const Eigen::MatrixXd& A = base.matrix();
    for (double sp : {std::max(0.0, s - eta), std::min(1.0, s + eta)}) {
      if (sp == s) continue;
      const RateKernel other = family(sp);
      const Eigen::MatrixXd& B = other.matrix();
      if (B.rows() != A.rows())
        throw InvalidArgument("local_stability: kernel size changed");
      for (int x = 0; x < A.rows(); ++x) {
        for (int y = 0; y < A.cols(); ++y) {
          if (x == y) continue;
          const double a = A(x, y);
          const double b = B(x, y);
          if ((a == 0.0) != (b == 0.0))
            throw ZeroRateEdge("local_stability: edge (" + std::to_string(x) +
                               "," + std::to_string(y) +
                               ") changes support between s = " +
                               std::to_string(s) + " and " +
                               std::to_string(sp));
          if (a != 0.0) worst = std::max(worst, std::abs(b / a - 1.0));
        }
      }
    }
  }
  return worst;
}

ErrorBoundReport verify_error_bound(const AnnealModel& model, double eps,
                                    const VerifyOptions& options) {
  if (!model.graph || !model.pi || !model.kernel || !model.capacity)
    throw InvalidArgument("verify_error_bound: incomplete model");
  if (!(eps > 0.0)) throw InvalidArgument("verify_error_bound: eps must be > 0");
  const double start = now_seconds();

  ErrorBoundReport report;
  report.eps = eps;
  report.kl0 = std::isnan(model.init_kl)
                   ? kl(model.pi(0.0).vec(), model.init_alg.vec())
                   : model.init_kl;
  if (report.kl0 > eps / 3.0)
    throw InvalidArgument("verify_error_bound: initial KL " +
                          std::to_string(report.kl0) + " exceeds eps/3");

  CurveSpec curve;
  curve.graph = model.graph;
  curve.grid = uniform_grid(0.0, 1.0, options.grid_nodes);
  curve.measure = model.pi;
  curve.capacity = model.capacity;
  curve.rate = model.rate;
  ActionReport act;
  try {
    act = action(curve);
  } catch (const DisconnectedCapacity& e) {
    throw ActionUnavailable(std::string("verify_error_bound: ") + e.what());
  } catch (const SingularSolve& e) {
    throw ActionUnavailable(std::string("verify_error_bound: ") + e.what());
  }
  report.action = act.value;
  report.action_refinement = act.refinement_error;

  report.T = options.T_override > 0.0 ? options.T_override
                                      : 2.0 * report.action / eps;
  if (options.N_override > 0) {
    report.N = options.N_override;
    report.eta = 1.0 / static_cast<double>(report.N);
  } else {
    if (!model.eta)
      throw InvalidArgument(
          "verify_error_bound: model has no eta bound and no N override");
    report.eta = model.eta(eps, report.T);
    if (!(report.eta > 0.0))
      throw InvalidArgument("verify_error_bound: eta bound must be positive");
    report.N = std::isfinite(report.eta)
                   ? static_cast<long long>(
                         std::max(1.0, std::ceil(1.0 / report.eta)))
                   : 1;
  }

  AnnealConfig config;
  config.T = report.T;
  config.N = report.N;
  const AnnealResult run = run_exact(model.kernel, config, model.init_alg);

  // delta: kernel deviation across sampled layer windows, comparing the
  // layer's frozen kernel at s_k against the window start and midpoint.
  const long long stride =
      std::max<long long>(1, report.N / std::max(1, options.delta_probes));
  for (long long k = 1; k <= report.N; k += stride) {
    const double sk = static_cast<double>(k) / static_cast<double>(report.N);
    const double s_lo = static_cast<double>(k - 1) /
                        static_cast<double>(report.N);
    const RateKernel frozen = model.kernel(sk);
    const Eigen::MatrixXd& A = frozen.matrix();
    for (double sp : {s_lo, 0.5 * (s_lo + sk)}) {
      const Eigen::MatrixXd B = model.kernel(sp).matrix();
      for (int x = 0; x < A.rows(); ++x)
        for (int y = 0; y < A.cols(); ++y) {
          if (x == y || A(x, y) == 0.0) continue;
          report.delta_measured = std::max(
              report.delta_measured, std::abs(B(x, y) / A(x, y) - 1.0));
        }
    }
  }

  report.kl_final = kl(model.pi(1.0).vec(), run.final_marginal->vec());
  if (report.T > 0.0) {
    report.bound = report.kl0 +
                   (1.0 + report.delta_measured) * report.action /
                       (4.0 * report.T) +
                   2.0 * report.delta_measured * report.T;
  } else {
    report.bound = report.action > 0.0
                       ? std::numeric_limits<double>::infinity()
                       : report.kl0;
  }
  report.pass = report.kl_final <= eps;
  report.bound_holds = report.kl_final <= report.bound;
  report.elapsed_seconds = now_seconds() - start;
  return report;
}

}  // namespace ota
