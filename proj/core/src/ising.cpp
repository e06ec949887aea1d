#include "ota/ising.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>

#include "ota/errors.hpp"
#include "ota/transport.hpp"

namespace ota {

namespace {

constexpr int kMaxFullSpins = 12;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

void check_sites(int n) {
  if (n < 1) throw InvalidArgument("ising: n must be >= 1");
}

void check_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw InvalidArgument("ising: beta must be finite and >= 0");
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) acc += std::exp(v(i) - m);
  return m + std::log(acc);
}

// Normalized log pi-bar over m = -n, -n+2, ..., n (index k = (m+n)/2).
Eigen::VectorXd bar_log_measure(int n, double beta) {
  Eigen::VectorXd logw(n + 1);
  const double lg_n = std::lgamma(n + 1.0);
  for (int k = 0; k <= n; ++k) {
    const double m = 2.0 * k - n;
    logw(k) = lg_n - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
              beta * m * m / (2.0 * n);
  }
  logw.array() -= log_sum_exp(logw);
  return logw;
}

Eigen::VectorXd positive_exp(const Eigen::VectorXd& logv) {
  Eigen::VectorXd out(logv.size());
  for (int i = 0; i < logv.size(); ++i)
    out(i) = std::max(std::exp(logv(i)), std::numeric_limits<double>::min());
  return out;
}

// log of the closed-form capacity on the unfolded edge (m, m+2), given the
// normalized log measure. k is the index of m.
double bar_log_capacity(int n, const Eigen::VectorXd& log_pi, int k) {
  const double m = 2.0 * k - n;
  const double la = log_pi(k);
  const double lb = log_pi(k + 1);
  const double log_ratio = std::log((n - m) / (n + m + 2.0));
  const double hi = std::max(log_ratio + la, lb);
  const double log_den =
      hi + std::log(std::exp(log_ratio + la - hi) + std::exp(lb - hi));
  return std::log((n - m) / (2.0 * n)) + la + lb - log_den;
}

}  // namespace

ProbVector ising_distribution(int n, double beta) {
  check_sites(n);
  check_beta(beta);
  if (n > kMaxFullSpins)
    throw TooLarge("ising_distribution: 2^" + std::to_string(n) +
                   " states exceeds the enumeration cap (n <= 12)");
  const int size = 1 << n;
  Eigen::VectorXd w(size);
  for (int s = 0; s < size; ++s) {
    const double m = ising_magnetization(n, s);
    w(s) = beta * m * m / (2.0 * n);
  }
  w.array() -= w.maxCoeff();
  return ProbVector::normalized(w.array().exp());
}

StateGraphPtr ising_graph(int n) {
  check_sites(n);
  if (n > kMaxFullSpins)
    throw TooLarge("ising_graph: 2^" + std::to_string(n) +
                   " states exceeds the enumeration cap (n <= 12)");
  // Annealing runners request the graph once per layer; share one immutable
  // copy per n.
  static std::array<StateGraphPtr, kMaxFullSpins + 1> cache;
  static std::mutex cache_mutex;
  {
    const std::scoped_lock lock(cache_mutex);
    if (cache[static_cast<std::size_t>(n)])
      return cache[static_cast<std::size_t>(n)];
  }
  const int size = 1 << n;
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(size) * n / 2);
  for (int s = 0; s < size; ++s)
    for (int i = 0; i < n; ++i) {
      const int t = s ^ (1 << i);
      if (t > s) edges.emplace_back(s, t);
    }
  StateGraphPtr graph = StateGraph::make(size, edges);
  const std::scoped_lock lock(cache_mutex);
  cache[static_cast<std::size_t>(n)] = graph;
  return graph;
}

int ising_magnetization(int n, int state) {
  check_sites(n);
  if (n > 30 || state < 0 || state >= (1 << n))
    throw InvalidArgument("ising_magnetization: state out of range");
  return 2 * std::popcount(static_cast<unsigned>(state)) - n;
}

RateKernel glauber_kernel(const ProbVector& pi) {
  const int size = static_cast<int>(pi.vec().size());
  if (size < 2 || (size & (size - 1)) != 0)
    throw InvalidArgument("glauber_kernel: size " + std::to_string(size) +
                          " is not a power of two");
  const int n = std::countr_zero(static_cast<unsigned>(size));
  StateGraphPtr graph = ising_graph(n);
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(size, size);
  for (int s = 0; s < size; ++s) {
    double exit = 0.0;
    for (int i = 0; i < n; ++i) {
      const int t = s ^ (1 << i);
      const double r = pi.vec()(t) / (pi.vec()(s) + pi.vec()(t)) / n;
      rates(s, t) = r;
      exit += r;
    }
    rates(s, s) = -exit;
  }
  for (int s = 0; s < size; ++s)
    for (int i = 0; i < n; ++i) {
      const int t = s ^ (1 << i);
      if (t < s) continue;
      const double fwd = pi.vec()(s) * rates(s, t);
      const double bwd = pi.vec()(t) * rates(t, s);
      if (std::abs(fwd - bwd) > 1e-12 * std::max({fwd, bwd, 1e-300}))
        throw NotReversible("glauber_kernel: detailed balance failed on (" +
                            std::to_string(s) + "," + std::to_string(t) + ")");
    }
  return RateKernel(std::move(graph), std::move(rates));
}

ProjectedIsingChain projected_chain(int n, double beta, bool folded) {
  check_sites(n);
  check_beta(beta);
  if (n > 10000) throw TooLarge("projected_chain: n must be <= 10^4");

  const Eigen::VectorXd log_pi = bar_log_measure(n, beta);

  std::vector<int> m_values;
  Eigen::VectorXd multiplicity;
  Eigen::VectorXd log_measure;
  std::vector<double> log_cap;
  if (!folded) {
    m_values.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) m_values[static_cast<std::size_t>(k)] =
        2 * k - n;
    multiplicity = Eigen::VectorXd::Ones(n + 1);
    log_measure = log_pi;
    log_cap.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) log_cap[static_cast<std::size_t>(k)] =
        bar_log_capacity(n, log_pi, k);
  } else {
    // Classes |m| = m0, m0+2, ..., n with m0 = n mod 2; class j holds the
    // unfolded state m = m0 + 2j (and its mirror when m > 0).
    const int m0 = n % 2;
    const int count = (n - m0) / 2 + 1;
    m_values.resize(static_cast<std::size_t>(count));
    multiplicity.resize(count);
    log_measure.resize(count);
    for (int j = 0; j < count; ++j) {
      const int m = m0 + 2 * j;
      const int k = (m + n) / 2;
      const double r = (m == 0) ? 1.0 : 2.0;
      m_values[static_cast<std::size_t>(j)] = m;
      multiplicity(j) = r;
      log_measure(j) = std::log(r) + log_pi(k);
    }
    log_cap.resize(static_cast<std::size_t>(count - 1));
    for (int j = 0; j + 1 < count; ++j) {
      const int m = m0 + 2 * j;
      log_cap[static_cast<std::size_t>(j)] =
          std::log(2.0) + bar_log_capacity(n, log_pi, (m + n) / 2);
    }
  }

  const int count = static_cast<int>(m_values.size());
  StateGraphPtr graph = StateGraph::path(count);
  ProbVector measure(positive_exp(log_measure));

  Eigen::VectorXd cap(count - 1 > 0 ? count - 1 : 0);
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(count, count);
  for (int j = 0; j + 1 < count; ++j) {
    const double lc = log_cap[static_cast<std::size_t>(j)];
    cap(j) = std::exp(lc);
    rates(j, j + 1) = std::exp(lc - log_measure(j));
    rates(j + 1, j) = std::exp(lc - log_measure(j + 1));
  }
  for (int j = 0; j < count; ++j) rates(j, j) = -rates.row(j).sum();

  // Edge ids of a path graph follow the adjacency order (j, j+1).
  Capacity capacity(graph, cap);
  RateKernel kernel(graph, std::move(rates));
  return ProjectedIsingChain{n,
                             beta,
                             folded,
                             std::move(graph),
                             std::move(m_values),
                             std::move(multiplicity),
                             std::move(measure),
                             std::move(capacity),
                             std::move(kernel)};
}

Projection magnetization_projection(int n) {
  StateGraphPtr full = ising_graph(n);
  const int size = 1 << n;
  std::vector<int> labels(static_cast<std::size_t>(size));
  for (int s = 0; s < size; ++s)
    labels[static_cast<std::size_t>(s)] = (ising_magnetization(n, s) + n) / 2;
  return Projection::build(std::move(full), std::move(labels), n + 1);
}

Projection folding_projection(int n) {
  check_sites(n);
  StateGraphPtr unfolded = StateGraph::path(n + 1);
  const int m0 = n % 2;
  const int count = (n - m0) / 2 + 1;
  std::vector<int> labels(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const int m = std::abs(2 * k - n);
    labels[static_cast<std::size_t>(k)] = (m - m0) / 2;
  }
  return Projection::build(std::move(unfolded), std::move(labels), count);
}

LandscapeReport landscape_classify(int n, double beta) {
  check_sites(n);
  check_beta(beta);
  const int m0 = n % 2;
  const int count = (n - m0) / 2 + 1;

  LandscapeReport report;
  if (count == 1) {
    report.kind = LandscapeKind::Decreasing;
    report.mode_m = m0;
    report.trichotomy_ok = true;
    report.regime_bounds_ok = true;
    report.detail = "single magnetization class";
    return report;
  }

  // log pi-bar(m+2) - log pi-bar(m); normalization cancels.
  auto diff = [n, beta](int m) {
    return std::log((n - m) / (n + m + 2.0)) + 2.0 * beta * (m + 1) / n;
  };
  int ups = 0;
  bool trichotomy = true;
  bool in_tail = false;
  for (int j = 0; j + 1 < count; ++j) {
    const double f = diff(m0 + 2 * j);
    if (f > 0.0) {
      if (in_tail) trichotomy = false;
      if (!in_tail) ++ups;
    } else {
      in_tail = true;
    }
  }
  report.trichotomy_ok = trichotomy;
  if (ups == 0) {
    report.kind = LandscapeKind::Decreasing;
    report.mode_m = m0;
  } else if (ups == count - 1) {
    report.kind = LandscapeKind::Increasing;
    report.mode_m = n;
  } else {
    report.kind = LandscapeKind::Unimodal;
    report.mode_m = m0 + 2 * ups;
  }

  bool regime_ok = trichotomy;
  std::string detail;
  if (beta <= 1.0 - 1.0 / n) {
    if (report.kind != LandscapeKind::Decreasing) {
      regime_ok = false;
      detail += "expected decreasing for beta <= 1 - 1/n; ";
    }
  }
  if (beta < 1.0) {
    // pi-bar(m) < e * pi-bar(m0) for every m.
    const double lg_n = std::lgamma(n + 1.0);
    auto logw = [n, beta, lg_n](int m) {
      const int k = (m + n) / 2;
      return lg_n - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
             beta * static_cast<double>(m) * m / (2.0 * n);
    };
    const double base = logw(m0);
    for (int j = 1; j < count; ++j) {
      if (logw(m0 + 2 * j) >= 1.0 + base) {
        regime_ok = false;
        detail += "e-bound violated at m = " + std::to_string(m0 + 2 * j) +
                  "; ";
        break;
      }
    }
  }
  if (beta >= 1.0) {
    if (report.kind == LandscapeKind::Decreasing) {
      regime_ok = false;
      detail += "decreasing despite beta >= 1; ";
    } else if (report.kind == LandscapeKind::Unimodal) {
      const double threshold = n * std::sqrt(1.0 - 1.0 / beta);
      if (!(report.mode_m > threshold)) {
        regime_ok = false;
        detail += "mode " + std::to_string(report.mode_m) + " not above " +
                  std::to_string(threshold) + "; ";
      }
    }
  }
  report.regime_bounds_ok = regime_ok;
  report.detail = detail.empty() ? "ok" : detail;
  return report;
}

Eigen::VectorXd dlog_folded_measure(int n, double beta, double beta_prime) {
  if (!std::isfinite(beta_prime))
    throw InvalidArgument("dlog_folded_measure: beta_prime must be finite");
  const ProjectedIsingChain chain = projected_chain(n, beta, true);
  const int count = static_cast<int>(chain.m_values.size());
  double second_moment = 0.0;
  for (int j = 0; j < count; ++j) {
    const double m = chain.m_values[j];
    second_moment += chain.measure.vec()(j) * m * m;
  }
  Eigen::VectorXd out(count);
  for (int j = 0; j < count; ++j) {
    const double m = chain.m_values[j];
    out(j) = beta_prime / (2.0 * n) * (m * m - second_moment);
  }
  return out;
}

IsingPipelineReport ising_pipeline(int n, double beta_target, double eps,
                                   const IsingPipelineOptions& options) {
  check_sites(n);
  check_beta(beta_target);
  if (!(eps > 0.0) || !(eps < 1.0))
    throw InvalidArgument("ising_pipeline: eps must lie in (0,1)");
  const double start = now_seconds();

  IsingPipelineReport report;
  report.n = n;
  report.beta = beta_target;
  report.eps = eps;

  const StateGraphPtr folded_graph = projected_chain(n, 0.0, true).graph;
  CurveSpec curve;
  curve.graph = folded_graph;
  curve.grid = uniform_grid(0.0, 1.0, options.grid_nodes);
  curve.measure = [n, beta_target](double s) {
    return projected_chain(n, beta_target * s, true).measure;
  };
  curve.capacity = [n, beta_target](double s) {
    return projected_chain(n, beta_target * s, true).capacity;
  };
  curve.rate = [n, beta_target](double s) {
    const ProjectedIsingChain chain = projected_chain(n, beta_target * s, true);
    const Eigen::VectorXd dlog =
        dlog_folded_measure(n, beta_target * s, beta_target);
    return MassRate(chain.measure.vec().cwiseProduct(dlog));
  };
  const ActionReport act = action(curve);
  report.action = act.value;
  report.action_refinement = act.refinement_error;
  report.action_bound =
      std::pow(static_cast<double>(n), 5) * beta_target * beta_target / 16.0;
  if (report.action > report.action_bound * (1.0 + 1e-9) + 1e-12)
    throw Error("ising_pipeline: measured action " +
                std::to_string(report.action) + " exceeds the bound " +
                std::to_string(report.action_bound));

  if (options.T_override > 0.0) {
    report.T = options.T_override;
  } else if (options.action_based_T) {
    report.T = 2.0 * report.action / eps;
  } else {
    report.T = 2.0 * std::pow(static_cast<double>(n), 5) * beta_target *
               beta_target / eps;
  }
  report.eta = (beta_target > 0.0 && report.T > 0.0)
                   ? eps / (24.0 * beta_target * report.T)
                   : std::numeric_limits<double>::infinity();
  if (options.N_override > 0) {
    report.N = options.N_override;
  } else if (std::isfinite(report.eta)) {
    report.N = static_cast<long long>(
        std::max(1.0, std::ceil(1.0 / report.eta)));
  } else {
    report.N = 1;
  }

  if (n <= kMaxFullSpins && !options.skip_exact_run) {
    const auto kernels = [n, beta_target](double s) {
      return glauber_kernel(ising_distribution(n, beta_target * s));
    };
    const ProbVector mu0 = ProbVector::uniform(1 << n);
    report.kl0 = kl(ising_distribution(n, 0.0).vec(), mu0.vec());

    AnnealConfig config;
    config.T = report.T;
    config.N = report.N;
    const AnnealResult run = run_exact(kernels, config, mu0);
    report.kl_final = kl(ising_distribution(n, beta_target).vec(),
                         run.final_marginal->vec());

    const long long stride =
        std::max<long long>(1, report.N / std::max(1, options.delta_probes));
    for (long long k = 1; k <= report.N; k += stride) {
      const double sk = static_cast<double>(k) / static_cast<double>(report.N);
      const double lo = static_cast<double>(k - 1) /
                        static_cast<double>(report.N);
      const Eigen::MatrixXd A = kernels(sk).matrix();
      for (double sp : {lo, 0.5 * (lo + sk)}) {
        const Eigen::MatrixXd B = kernels(sp).matrix();
        for (int x = 0; x < A.rows(); ++x)
          for (int y = 0; y < A.cols(); ++y) {
            if (x == y || A(x, y) == 0.0) continue;
            report.delta_measured = std::max(
                report.delta_measured, std::abs(B(x, y) / A(x, y) - 1.0));
          }
      }
    }
    report.exact_run = true;
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
  }
  report.elapsed_seconds = now_seconds() - start;
  return report;
}

}  // namespace ota
