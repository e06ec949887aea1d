#include "ota/potts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <utility>

#include "ota/errors.hpp"
#include "ota/ising.hpp"
#include "ota/transport.hpp"

namespace ota {

namespace {

constexpr long long kFullSpaceCap = 200000;
constexpr long long kProjectedCap = 2000000;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

void check_model(int n, int q) {
  if (q < 2) throw InvalidArgument("potts: q must be >= 2");
  if (n < 1) throw InvalidArgument("potts: n must be >= 1");
}

void check_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw InvalidArgument("potts: beta must be finite and >= 0");
}

// q^n, or -1 when it exceeds the full-space cap.
long long full_space_size(int n, int q) {
  long long size = 1;
  for (int i = 0; i < n; ++i) {
    size *= q;
    if (size > kFullSpaceCap) return -1;
  }
  return size;
}

std::vector<long long> power_table(int n, int q) {
  std::vector<long long> pow_q(static_cast<std::size_t>(n) + 1, 1);
  for (int i = 1; i <= n; ++i) pow_q[static_cast<std::size_t>(i)] =
      pow_q[static_cast<std::size_t>(i - 1)] * q;
  return pow_q;
}

int digit_at(long long state, int site, const std::vector<long long>& pow_q,
             int q) {
  return static_cast<int>((state / pow_q[static_cast<std::size_t>(site)]) % q);
}

double potts_energy(const std::vector<int>& m) {
  double h = 0.0;
  for (int v : m) h += static_cast<double>(v) * v;
  return h;
}

double log_multinomial(int n, const std::vector<int>& m) {
  double out = std::lgamma(n + 1.0);
  for (int v : m) out -= std::lgamma(v + 1.0);
  return out;
}

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

// All length-`parts` nonnegative integer vectors summing to `total`, in
// lexicographic order.
void enumerate_compositions(int total, int parts,
                            std::vector<std::vector<int>>& out) {
  std::vector<int> current(static_cast<std::size_t>(parts), 0);
  const auto recurse = [&](const auto& self, int pos, int remaining) -> void {
    if (pos == parts - 1) {
      current[static_cast<std::size_t>(pos)] = remaining;
      out.push_back(current);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      current[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  recurse(recurse, 0, total);
}

std::vector<int> sorted_desc(std::vector<int> m) {
  std::sort(m.begin(), m.end(), std::greater<int>());
  return m;
}

std::vector<int> diagonal_state(int n, int q, int t) {
  std::vector<int> m(static_cast<std::size_t>(q), t);
  m[0] = n - (q - 1) * t;
  return m;
}

void check_sorted_magnetization(int n, int q, const std::vector<int>& m) {
  if (static_cast<int>(m.size()) != q)
    throw InvalidArgument("potts: magnetization vector must have q entries");
  int sum = 0;
  for (std::size_t a = 0; a < m.size(); ++a) {
    if (m[a] < 0)
      throw InvalidArgument("potts: magnetization entries must be >= 0");
    if (a > 0 && m[a] > m[a - 1])
      throw InvalidArgument("potts: magnetization vector must be sorted "
                            "non-increasing");
    sum += m[a];
  }
  if (sum != n)
    throw InvalidArgument("potts: magnetization entries must sum to n");
}

// Composite Simpson on the uniform odd grid used everywhere here.
double simpson(const std::vector<double>& grid,
               const std::vector<double>& values) {
  const std::size_t m = grid.size();
  const double h = (grid.back() - grid.front()) / static_cast<double>(m - 1);
  double acc = values.front() + values.back();
  for (std::size_t i = 1; i + 1 < m; ++i)
    acc += values[i] * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

struct ProjectedBase {
  std::vector<std::vector<int>> states;
  std::map<std::vector<int>, int> index;
  Eigen::VectorXd log_measure;  // normalized
};

ProjectedBase projected_base(int n, int q, double beta) {
  ProjectedBase base;
  enumerate_compositions(n, q, base.states);
  if (static_cast<long long>(base.states.size()) > kProjectedCap)
    throw TooLarge("potts: projected space has " +
                   std::to_string(base.states.size()) + " states");
  const int count = static_cast<int>(base.states.size());
  for (int i = 0; i < count; ++i) base.index[base.states[i]] = i;
  std::vector<double> logw(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    logw[static_cast<std::size_t>(i)] =
        log_multinomial(n, base.states[static_cast<std::size_t>(i)]) +
        beta / n * potts_energy(base.states[static_cast<std::size_t>(i)]);
  const double log_z = log_sum_exp(logw);
  base.log_measure.resize(count);
  for (int i = 0; i < count; ++i)
    base.log_measure(i) = logw[static_cast<std::size_t>(i)] - log_z;
  return base;
}

Eigen::VectorXd positive_exp(const Eigen::VectorXd& logv) {
  Eigen::VectorXd out(logv.size());
  for (int i = 0; i < logv.size(); ++i)
    out(i) = std::max(std::exp(logv(i)), std::numeric_limits<double>::min());
  return out;
}

// Exact projected kernel by enumeration over block removals x and block
// recolorings y: removing x <= m of the counts (prod_a C(m_a, x_a) blocks)
// leaves m - x; recoloring the q-1 block sites with counts y lands on
// m - x + y with heat-bath weight proportional to the multinomial count of
// colorings times the Gibbs weight.
Eigen::MatrixXd projected_kernel_matrix(int n, int q, double beta,
                                        const ProjectedBase& base) {
  const int count = static_cast<int>(base.states.size());
  std::vector<std::vector<int>> block_counts;
  enumerate_compositions(q - 1, q, block_counts);
  std::vector<double> log_block_mult(block_counts.size());
  for (std::size_t t = 0; t < block_counts.size(); ++t)
    log_block_mult[t] = log_multinomial(q - 1, block_counts[t]);
  const double log_total_blocks =
      std::lgamma(n + 1.0) - std::lgamma(q + 0.0) - std::lgamma(n - q + 2.0);

  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(count, count);
  std::vector<int> target(static_cast<std::size_t>(q));
  std::vector<double> z_terms(block_counts.size());
  for (int i = 0; i < count; ++i) {
    const std::vector<int>& m = base.states[static_cast<std::size_t>(i)];
    for (const std::vector<int>& x : block_counts) {
      double log_choose = 0.0;
      bool feasible = true;
      for (int a = 0; a < q; ++a) {
        if (x[static_cast<std::size_t>(a)] > m[static_cast<std::size_t>(a)]) {
          feasible = false;
          break;
        }
        log_choose += std::lgamma(m[static_cast<std::size_t>(a)] + 1.0) -
                      std::lgamma(x[static_cast<std::size_t>(a)] + 1.0) -
                      std::lgamma(m[static_cast<std::size_t>(a)] -
                                  x[static_cast<std::size_t>(a)] + 1.0);
      }
      if (!feasible) continue;
      for (std::size_t t = 0; t < block_counts.size(); ++t) {
        double h = 0.0;
        for (int a = 0; a < q; ++a) {
          const double v = m[static_cast<std::size_t>(a)] -
                           x[static_cast<std::size_t>(a)] +
                           block_counts[t][static_cast<std::size_t>(a)];
          h += v * v;
        }
        z_terms[t] = log_block_mult[t] + beta / n * h;
      }
      const double log_z = log_sum_exp(z_terms);
      for (std::size_t t = 0; t < block_counts.size(); ++t) {
        bool same = true;
        for (int a = 0; a < q; ++a) {
          target[static_cast<std::size_t>(a)] =
              m[static_cast<std::size_t>(a)] -
              x[static_cast<std::size_t>(a)] +
              block_counts[t][static_cast<std::size_t>(a)];
          if (target[static_cast<std::size_t>(a)] !=
              m[static_cast<std::size_t>(a)])
            same = false;
        }
        if (same) continue;
        const int j = base.index.at(target);
        rates(i, j) += std::exp(log_choose - log_total_blocks + z_terms[t] -
                                log_z);
      }
    }
    rates(i, i) = -rates.row(i).sum();
  }
  return rates;
}

StateGraphPtr graph_from_rates(const Eigen::MatrixXd& rates) {
  const int count = static_cast<int>(rates.rows());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < count; ++i)
    for (int j = i + 1; j < count; ++j)
      if (rates(i, j) > 0.0 || rates(j, i) > 0.0) edges.emplace_back(i, j);
  return StateGraph::make(count, edges);
}

}  // namespace

ProbVector potts_distribution(int n, int q, double beta) {
  check_model(n, q);
  check_beta(beta);
  const long long size = full_space_size(n, q);
  if (size < 0)
    throw TooLarge("potts_distribution: q^n exceeds the enumeration cap");
  const std::vector<long long> pow_q = power_table(n, q);
  Eigen::VectorXd logw(size);
  std::vector<int> counts(static_cast<std::size_t>(q));
  for (long long s = 0; s < size; ++s) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(
        digit_at(s, i, pow_q, q))];
    logw(s) = beta / n * potts_energy(counts);
  }
  logw.array() -= logw.maxCoeff();
  return ProbVector::normalized(logw.array().exp());
}

StateGraphPtr potts_graph(int n, int q) {
  check_model(n, q);
  const long long size = full_space_size(n, q);
  if (size < 0) throw TooLarge("potts_graph: q^n exceeds the enumeration cap");
  // Annealing runners rebuild kernels once per layer; the graph itself only
  // depends on (n, q), so share one immutable copy.
  static std::map<std::pair<int, int>, StateGraphPtr> cache;
  static std::mutex cache_mutex;
  {
    const std::scoped_lock lock(cache_mutex);
    const auto it = cache.find({n, q});
    if (it != cache.end()) return it->second;
  }
  const std::vector<long long> pow_q = power_table(n, q);
  std::vector<std::pair<int, int>> edges;
  // Neighbors of s: recolor up to q-1 sites, each to a different color.
  // DFS over sites with a running target state keeps this linear in the
  // neighbor count.
  const int max_changes = q - 1;
  for (long long s = 0; s < size; ++s) {
    const auto recurse = [&](const auto& self, int site, long long t,
                             int changed) -> void {
      if (site >= n || changed == max_changes) return;
      self(self, site + 1, t, changed);
      const int old = digit_at(t, site, pow_q, q);
      for (int c = 0; c < q; ++c) {
        if (c == old) continue;
        const long long next =
            t + (static_cast<long long>(c) - old) *
                    pow_q[static_cast<std::size_t>(site)];
        if (next > s)
          edges.emplace_back(static_cast<int>(s), static_cast<int>(next));
        self(self, site + 1, next, changed + 1);
      }
    };
    recurse(recurse, 0, s, 0);
  }
  StateGraphPtr graph = StateGraph::make(static_cast<int>(size), edges);
  const std::scoped_lock lock(cache_mutex);
  cache.emplace(std::make_pair(n, q), graph);
  return graph;
}

std::vector<int> potts_magnetization(int n, int q, int state) {
  check_model(n, q);
  const long long size = full_space_size(n, q);
  if (size < 0 || state < 0 || state >= size)
    throw InvalidArgument("potts_magnetization: state out of range");
  const std::vector<long long> pow_q = power_table(n, q);
  std::vector<int> counts(static_cast<std::size_t>(q), 0);
  for (int i = 0; i < n; ++i)
    ++counts[static_cast<std::size_t>(digit_at(state, i, pow_q, q))];
  return counts;
}

RateKernel block_glauber_kernel(const ProbVector& pi, int q) {
  if (q < 2) throw InvalidArgument("block_glauber_kernel: q must be >= 2");
  const long long size = pi.vec().size();
  int n = 0;
  long long probe = 1;
  while (probe < size) {
    probe *= q;
    ++n;
  }
  if (probe != size || n < 1)
    throw InvalidArgument("block_glauber_kernel: size " +
                          std::to_string(size) + " is not a power of q");
  if (n < q - 1)
    throw InvalidArgument("block_glauber_kernel: needs n >= q - 1 sites");
  StateGraphPtr graph = potts_graph(n, q);
  const std::vector<long long> pow_q = power_table(n, q);

  // All (q-1)-subsets of sites.
  std::vector<std::vector<int>> blocks;
  {
    std::vector<int> pick;
    const auto recurse = [&](const auto& self, int next) -> void {
      if (static_cast<int>(pick.size()) == q - 1) {
        blocks.push_back(pick);
        return;
      }
      for (int i = next; i < n; ++i) {
        pick.push_back(i);
        self(self, i + 1);
        pick.pop_back();
      }
    };
    recurse(recurse, 0);
  }
  const double inv_blocks = 1.0 / static_cast<double>(blocks.size());

  long long tuples = 1;
  for (int i = 0; i < q - 1; ++i) tuples *= q;
  std::vector<long long> targets(static_cast<std::size_t>(tuples));

  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(size, size);
  for (long long s = 0; s < size; ++s) {
    for (const std::vector<int>& block : blocks) {
      long long stripped = s;
      for (int site : block)
        stripped -= static_cast<long long>(digit_at(s, site, pow_q, q)) *
                    pow_q[static_cast<std::size_t>(site)];
      double z = 0.0;
      for (long long t = 0; t < tuples; ++t) {
        long long target = stripped;
        long long code = t;
        for (int j = 0; j < q - 1; ++j) {
          target += (code % q) * pow_q[static_cast<std::size_t>(block[
              static_cast<std::size_t>(j)])];
          code /= q;
        }
        targets[static_cast<std::size_t>(t)] = target;
        z += pi.vec()(target);
      }
      for (long long t = 0; t < tuples; ++t) {
        const long long target = targets[static_cast<std::size_t>(t)];
        if (target == s) continue;
        rates(s, target) += inv_blocks * pi.vec()(target) / z;
      }
    }
    rates(s, s) = -rates.row(s).sum();
  }

  for (long long s = 0; s < size; ++s)
    for (long long t = s + 1; t < size; ++t) {
      if (rates(s, t) == 0.0 && rates(t, s) == 0.0) continue;
      const double fwd = pi.vec()(s) * rates(s, t);
      const double bwd = pi.vec()(t) * rates(t, s);
      if (std::abs(fwd - bwd) > 1e-10 * std::max({fwd, bwd, 1e-300}))
        throw NotReversible("block_glauber_kernel: detailed balance failed "
                            "on (" + std::to_string(s) + "," +
                            std::to_string(t) + ")");
    }
  return RateKernel(std::move(graph), std::move(rates));
}

ProjectedPottsChain projected_potts_chain(int n, int q, double beta,
                                          bool folded) {
  check_model(n, q);
  check_beta(beta);
  if (n < q - 1)
    throw InvalidArgument("projected_potts_chain: needs n >= q - 1");
  const ProjectedBase base = projected_base(n, q, beta);
  const Eigen::MatrixXd rates = projected_kernel_matrix(n, q, beta, base);
  StateGraphPtr unfolded_graph = graph_from_rates(rates);
  const ProbVector unfolded_measure(positive_exp(base.log_measure));

  if (!folded) {
    RateKernel kernel(unfolded_graph, rates);
    Capacity capacity = capacity_from_kernel(kernel, unfolded_measure);
    return ProjectedPottsChain{
        n,
        q,
        beta,
        folded,
        unfolded_graph,
        base.states,
        Eigen::VectorXd::Ones(static_cast<int>(base.states.size())),
        unfolded_measure,
        std::move(capacity),
        std::move(kernel)};
  }

  // Quotient by color permutations: classes are sorted count vectors.
  std::map<std::vector<int>, int> class_index;
  for (const std::vector<int>& m : base.states) class_index[sorted_desc(m)];
  int next = 0;
  for (auto& kv : class_index) kv.second = next++;
  std::vector<int> labels(base.states.size());
  for (std::size_t i = 0; i < base.states.size(); ++i)
    labels[i] = class_index.at(sorted_desc(base.states[i]));

  RateKernel unfolded_kernel(unfolded_graph, rates);
  Projection proj = Projection::build(unfolded_graph, std::move(labels), next);
  const SymmetryReport sym =
      verify_symmetry(proj, unfolded_measure, unfolded_kernel);
  if (!sym.pass)
    throw Error("projected_potts_chain: color symmetry check failed: " +
                sym.detail);

  std::vector<std::vector<int>> m_states(static_cast<std::size_t>(next));
  for (const auto& kv : class_index)
    m_states[static_cast<std::size_t>(kv.second)] = kv.first;
  Eigen::VectorXd multiplicity(next);
  Eigen::MatrixXd folded_rates(next, next);
  for (int c = 0; c < next; ++c) {
    const int rep = proj.fibers()[static_cast<std::size_t>(c)].front();
    multiplicity(c) =
        static_cast<double>(proj.fibers()[static_cast<std::size_t>(c)].size());
    folded_rates.row(c) =
        project_vector(proj, rates.row(rep).transpose()).transpose();
  }
  ProbVector measure(project_vector(proj, unfolded_measure.vec()));
  RateKernel kernel(proj.projected(), std::move(folded_rates));
  Capacity capacity = capacity_from_kernel(kernel, measure);
  return ProjectedPottsChain{n,
                             q,
                             beta,
                             folded,
                             proj.projected(),
                             std::move(m_states),
                             std::move(multiplicity),
                             std::move(measure),
                             std::move(capacity),
                             std::move(kernel)};
}

Projection potts_magnetization_projection(int n, int q) {
  check_model(n, q);
  StateGraphPtr full = potts_graph(n, q);
  const ProjectedBase base = projected_base(n, q, 0.0);
  const long long size = full_space_size(n, q);
  std::vector<int> labels(static_cast<std::size_t>(size));
  for (long long s = 0; s < size; ++s)
    labels[static_cast<std::size_t>(s)] =
        base.index.at(potts_magnetization(n, q, static_cast<int>(s)));
  return Projection::build(std::move(full), std::move(labels),
                           static_cast<int>(base.states.size()));
}

Projection potts_folding_projection(int n, int q) {
  check_model(n, q);
  const ProjectedBase base = projected_base(n, q, 0.0);
  const Eigen::MatrixXd rates = projected_kernel_matrix(n, q, 0.0, base);
  StateGraphPtr unfolded_graph = graph_from_rates(rates);
  std::map<std::vector<int>, int> class_index;
  for (const std::vector<int>& m : base.states) class_index[sorted_desc(m)];
  int next = 0;
  for (auto& kv : class_index) kv.second = next++;
  std::vector<int> labels(base.states.size());
  for (std::size_t i = 0; i < base.states.size(); ++i)
    labels[i] = class_index.at(sorted_desc(base.states[i]));
  return Projection::build(std::move(unfolded_graph), std::move(labels),
                           next);
}

DiagonalLandscape potts_diagonal_landscape(int n, int q, double beta) {
  check_model(n, q);
  check_beta(beta);
  if (n < q)
    throw InvalidArgument("potts_diagonal_landscape: needs n >= q");
  DiagonalLandscape out;
  const int t_max = n / q;
  out.log_weight.resize(static_cast<std::size_t>(t_max) + 1);
  for (int t = 0; t <= t_max; ++t) {
    const std::vector<int> m = diagonal_state(n, q, t);
    out.log_weight[static_cast<std::size_t>(t)] =
        log_multinomial(n, m) + beta / n * potts_energy(m);
  }
  out.mode_t = static_cast<int>(
      std::max_element(out.log_weight.begin(), out.log_weight.end()) -
      out.log_weight.begin());
  bool in_tail = false;
  out.shape_ok = true;
  for (std::size_t t = 0; t + 1 < out.log_weight.size(); ++t) {
    if (out.log_weight[t + 1] > out.log_weight[t]) {
      if (in_tail) out.shape_ok = false;
    } else {
      in_tail = true;
    }
  }
  return out;
}

std::vector<std::vector<int>> potts_path_construction(
    int n, int q, double beta, const std::vector<int>& m) {
  check_model(n, q);
  if (n < q) throw InvalidArgument("potts_path_construction: needs n >= q");
  if (!std::isfinite(beta) || beta < static_cast<double>(q) / 2.0)
    throw PreconditionBeta("potts_path_construction: beta = " +
                           std::to_string(beta) + " is below q/2");
  check_sorted_magnetization(n, q, m);

  std::vector<std::vector<int>> path;
  std::vector<int> work = m;
  path.push_back(work);
  const auto append = [&path](const std::vector<int>& v) {
    if (v != path.back()) path.push_back(v);
  };
  const auto log_mu = [n, q, beta](const std::vector<int>& v) {
    return log_multinomial(n, v) + beta / n * potts_energy(v);
  };

  // Drain every heavy color into color 1, aiming at the mode of the
  // two-color restriction.
  const double heavy = n / (2.0 * beta);
  for (int a = q; a >= 2; --a) {
    if (work[static_cast<std::size_t>(a - 1)] < heavy) continue;
    const int spins = work[0] + work[static_cast<std::size_t>(a - 1)];
    const double beta_ising = static_cast<double>(spins) * beta / n;
    const int d_hat = landscape_classify(spins, beta_ising).mode_m;
    const int target_a = (spins - d_hat) / 2;
    const int below = a < q ? work[static_cast<std::size_t>(a)] : 0;
    const int floor_a = std::max(target_a, below);
    while (work[static_cast<std::size_t>(a - 1)] > floor_a) {
      --work[static_cast<std::size_t>(a - 1)];
      ++work[0];
      append(work);
    }
  }

  // Equalize colors 2..q toward an almost-flat split of what is left.
  {
    const int rest = n - work[0];
    const int parts = q - 1;
    const int lo = rest / parts;
    const int rem = rest % parts;
    std::vector<int> target(static_cast<std::size_t>(parts));
    for (int j = 0; j < parts; ++j)
      target[static_cast<std::size_t>(j)] = lo + (j < rem ? 1 : 0);
    const auto matches = [&] {
      for (int j = 0; j < parts; ++j)
        if (work[static_cast<std::size_t>(j + 1)] !=
            target[static_cast<std::size_t>(j)])
          return false;
      return true;
    };
    while (!matches()) {
      int over = -1;
      int under = -1;
      for (int j = parts - 1; j >= 0; --j)
        if (work[static_cast<std::size_t>(j + 1)] >
            target[static_cast<std::size_t>(j)]) {
          over = j;
          break;
        }
      for (int j = 0; j < parts; ++j)
        if (work[static_cast<std::size_t>(j + 1)] <
            target[static_cast<std::size_t>(j)]) {
          under = j;
          break;
        }
      while (work[static_cast<std::size_t>(over + 1)] >
                 target[static_cast<std::size_t>(over)] &&
             work[static_cast<std::size_t>(under + 1)] <
                 target[static_cast<std::size_t>(under)]) {
        --work[static_cast<std::size_t>(over + 1)];
        ++work[static_cast<std::size_t>(under + 1)];
        append(work);
      }
    }
  }

  // One block move lands on the diagonal ray.
  if (work[1] == work[static_cast<std::size_t>(q - 1)] + 1) {
    const int mq = work[static_cast<std::size_t>(q - 1)];
    const std::vector<int> low = diagonal_state(n, q, mq);
    if (mq == n / q || log_mu(low) >= log_mu(diagonal_state(n, q, mq + 1))) {
      work = low;
    } else {
      work = diagonal_state(n, q, mq + 1);
    }
  }
  append(work);

  // Slide along the diagonal to the mode.
  const int t_star = potts_diagonal_landscape(n, q, beta).mode_t;
  while (work[static_cast<std::size_t>(q - 1)] > t_star) {
    work = diagonal_state(n, q, work[static_cast<std::size_t>(q - 1)] - 1);
    append(work);
  }
  while (work[static_cast<std::size_t>(q - 1)] < t_star) {
    work = diagonal_state(n, q, work[static_cast<std::size_t>(q - 1)] + 1);
    append(work);
  }
  return path;
}

std::pair<Flux, TransportPlan> greedy_flux(StateGraphPtr graph,
                                           const MassRate& D,
                                           const PathProvider& paths) {
  if (!graph) throw InvalidArgument("greedy_flux: null graph");
  if (!paths) throw InvalidArgument("greedy_flux: null path provider");
  if (D.vec().size() != graph->num_states())
    throw InvalidArgument("greedy_flux: rate size mismatch");
  const double scale = std::max(1.0, D.vec().cwiseAbs().sum());

  Eigen::VectorXd residual = D.vec();
  std::vector<int> sources;
  std::vector<int> sinks;
  for (int x = 0; x < residual.size(); ++x) {
    if (residual(x) < 0.0) sources.push_back(x);
    if (residual(x) > 0.0) sinks.push_back(x);
  }

  Eigen::VectorXd flux_values = Eigen::VectorXd::Zero(graph->num_edges());
  TransportPlan plan;
  std::size_t ix = 0;
  std::size_t iy = 0;
  while (ix < sources.size() && iy < sinks.size()) {
    const int x = sources[ix];
    const int y = sinks[iy];
    const double supply = -residual(x);
    const double demand = residual(y);
    const double j = std::min(supply, demand);
    if (j > 0.0) {
      std::vector<int> path = paths(x, y);
      if (path.empty() || path.front() != x || path.back() != y)
        throw BrokenPath("greedy_flux: path for (" + std::to_string(x) +
                         "," + std::to_string(y) +
                         ") does not join its endpoints");
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const int u = path[i];
        const int v = path[i + 1];
        if (u == v) continue;
        const int e = graph->edge_index(u, v);
        if (e < 0)
          throw BrokenPath("greedy_flux: path step (" + std::to_string(u) +
                           "," + std::to_string(v) + ") is not an edge");
        flux_values(e) += u == graph->edges()[static_cast<std::size_t>(e)].lo
                              ? j
                              : -j;
      }
      plan.entries.push_back({x, y, j, std::move(path)});
    }
    // The retired side hits its target exactly; no epsilon drift survives.
    if (supply <= demand) {
      residual(x) = 0.0;
      residual(y) = demand - supply;
      ++ix;
    }
    if (demand <= supply) {
      residual(y) = 0.0;
      if (demand < supply) residual(x) = -(supply - demand);
      ++iy;
    }
  }
  for (int x = 0; x < residual.size(); ++x)
    if (std::abs(residual(x)) > 1e-10 * scale)
      throw UnbalancedD("greedy_flux: leftover mass " +
                        std::to_string(residual(x)) + " at state " +
                        std::to_string(x));
  return {Flux(std::move(graph), std::move(flux_values)), std::move(plan)};
}

PottsActionReport potts_action(int n, int q, const Schedule& schedule,
                               int grid_nodes) {
  check_model(n, q);
  if (n < q) throw InvalidArgument("potts_action: needs n >= q");
  const std::vector<double> grid = uniform_grid(0.0, 1.0, grid_nodes);
  for (double s : grid)
    if (schedule.beta(s) < static_cast<double>(q) / 2.0 - 1e-12)
      throw PreconditionBeta("potts_action: beta(" + std::to_string(s) +
                             ") = " + std::to_string(schedule.beta(s)) +
                             " is below q/2");

  const auto chain_at = [n, q, &schedule](double s) {
    return projected_potts_chain(n, q, schedule.beta(s), true);
  };
  const auto rate_at = [n, &schedule](const ProjectedPottsChain& chain,
                                      double s) {
    const int count = static_cast<int>(chain.m_states.size());
    Eigen::VectorXd h(count);
    for (int i = 0; i < count; ++i)
      h(i) = potts_energy(chain.m_states[static_cast<std::size_t>(i)]);
    const double mean = chain.measure.vec().dot(h);
    return Eigen::VectorXd(schedule.beta_prime(s) / n *
                           chain.measure.vec().cwiseProduct(
                               (h.array() - mean).matrix()));
  };

  const ProjectedPottsChain chain0 = chain_at(0.0);
  CurveSpec curve;
  curve.graph = chain0.graph;
  curve.grid = grid;
  curve.measure = [&chain_at](double s) { return chain_at(s).measure; };
  curve.capacity = [&chain_at](double s) { return chain_at(s).capacity; };
  curve.rate = [&chain_at, &rate_at](double s) {
    const ProjectedPottsChain chain = chain_at(s);
    return MassRate(rate_at(chain, s));
  };
  const ActionReport exact = action(curve);

  PottsActionReport report;
  report.exact = exact.value;
  report.exact_refinement = exact.refinement_error;
  report.grid = grid;
  report.exact_integrand = exact.metric_derivative_sq;

  report.constructive_integrand.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const ProjectedPottsChain chain = chain_at(s);
    const Eigen::VectorXd d = rate_at(chain, s);
    if (d.cwiseAbs().maxCoeff() == 0.0) {
      report.constructive_integrand[i] = 0.0;
      continue;
    }
    std::map<std::vector<int>, int> index;
    for (std::size_t k = 0; k < chain.m_states.size(); ++k)
      index[chain.m_states[k]] = static_cast<int>(k);
    const double beta_s = schedule.beta(s);
    const PathProvider provider = [&](int x, int y) {
      std::vector<std::vector<int>> to_mode_x = potts_path_construction(
          n, q, beta_s, chain.m_states[static_cast<std::size_t>(x)]);
      std::vector<std::vector<int>> to_mode_y = potts_path_construction(
          n, q, beta_s, chain.m_states[static_cast<std::size_t>(y)]);
      if (to_mode_x.back() != to_mode_y.back())
        throw BrokenPath("potts_action: path endpoints disagree on the mode");
      std::size_t ex = to_mode_x.size() - 1;
      std::size_t ey = to_mode_y.size() - 1;
      while (ex > 0 && ey > 0 && to_mode_x[ex - 1] == to_mode_y[ey - 1]) {
        --ex;
        --ey;
      }
      std::vector<int> out;
      for (std::size_t k = 0; k <= ex; ++k)
        out.push_back(index.at(to_mode_x[k]));
      for (std::size_t k = ey; k-- > 0;)
        out.push_back(index.at(to_mode_y[k]));
      return out;
    };
    const auto [flux, plan] = greedy_flux(chain.graph, MassRate(d), provider);
    report.constructive_integrand[i] = flux_cost(chain.capacity, flux);
  }
  report.constructive = simpson(grid, report.constructive_integrand);
  if (report.exact >
      report.constructive * (1.0 + 1e-9) + 1e-12)
    throw Error("potts_action: exact action " + std::to_string(report.exact) +
                " exceeds the constructive bound " +
                std::to_string(report.constructive));
  return report;
}

PottsInit potts_init(int n, int q, double eps) {
  check_model(n, q);
  if (!(eps > 0.0) || !(eps < 1.0))
    throw InvalidArgument("potts_init: eps must lie in (0,1)");
  PottsInit out;
  out.eps = eps;
  out.beta0 = n * std::log(static_cast<double>(q)) + std::log(6.0 / eps);
  out.threshold = eps / 3.0;

  const long long size = full_space_size(n, q);
  if (size > 0) {
    const ProbVector mu = potts_distribution(n, q, out.beta0);
    const std::vector<long long> pow_q = power_table(n, q);
    Eigen::VectorXd nu = Eigen::VectorXd::Constant(
        size, eps / 6.0 / static_cast<double>(size));
    // All-sites-color-c is c * (1 + q + ... + q^{n-1}).
    const long long repunit =
        (pow_q[static_cast<std::size_t>(n)] - 1) / (q - 1);
    for (int c = 0; c < q; ++c) {
      const long long mono = c * repunit;
      nu(mono) += (1.0 - eps / 6.0) / q;
      out.mass_on_monochromatic += mu.vec()(mono);
    }
    out.kl_value = kl(mu.vec(), nu);
    out.nu = ProbVector(nu);
    out.certified = out.kl_value < out.threshold;
    return out;
  }

  // Fiber route: both mu and nu are constant on magnetization classes.
  const ProjectedBase base = projected_base(n, q, out.beta0);
  const double log_qn = n * std::log(static_cast<double>(q));
  const double log_unif_part = std::log(eps / 6.0) - log_qn;
  double kl_acc = 0.0;
  double z_full = 0.0;
  {
    std::vector<double> logw(base.states.size());
    for (std::size_t i = 0; i < base.states.size(); ++i)
      logw[i] = log_multinomial(n, base.states[i]) +
                out.beta0 / n * potts_energy(base.states[i]);
    z_full = log_sum_exp(logw);
  }
  for (std::size_t i = 0; i < base.states.size(); ++i) {
    const std::vector<int>& m = base.states[i];
    const double log_mu_state =
        out.beta0 / n * potts_energy(m) - z_full;
    const bool mono =
        *std::max_element(m.begin(), m.end()) == n;
    double log_nu_state = log_unif_part;
    if (mono) {
      const double other = std::log1p(-eps / 6.0) -
                           std::log(static_cast<double>(q));
      const double hi = std::max(log_unif_part, other);
      log_nu_state = hi + std::log(std::exp(log_unif_part - hi) +
                                   std::exp(other - hi));
      out.mass_on_monochromatic += std::exp(log_mu_state);
    }
    const double class_mass =
        std::exp(log_multinomial(n, m) + out.beta0 / n * potts_energy(m) -
                 z_full);
    kl_acc += class_mass * (log_mu_state - log_nu_state);
  }
  out.kl_value = kl_acc;
  out.certified = out.kl_value < out.threshold;
  return out;
}

PottsPipelineReport potts_pipeline(int n, int q, double beta_target,
                                   double eps,
                                   const PottsPipelineOptions& options) {
  check_model(n, q);
  if (n < q) throw InvalidArgument("potts_pipeline: needs n >= q");
  check_beta(beta_target);
  if (beta_target < static_cast<double>(q) / 2.0)
    throw PreconditionBeta("potts_pipeline: beta_target below q/2");
  if (!(eps > 0.0) || !(eps < 1.0))
    throw InvalidArgument("potts_pipeline: eps must lie in (0,1)");
  const double start = now_seconds();

  PottsPipelineReport report;
  report.n = n;
  report.q = q;
  report.beta = beta_target;
  report.eps = eps;
  report.kl_final_full = std::numeric_limits<double>::quiet_NaN();

  const PottsInit init = potts_init(n, q, eps);
  report.beta0 = init.beta0;
  report.init_kl = init.kl_value;
  if (beta_target > init.beta0)
    throw InvalidArgument("potts_pipeline: beta_target exceeds beta0");
  const Schedule schedule = Schedule::linear_down(init.beta0, beta_target);

  const auto chain_at = [n, q, &schedule](double s) {
    return projected_potts_chain(n, q, schedule.beta(s), true);
  };
  const auto rate_at = [n, &schedule](const ProjectedPottsChain& chain,
                                      double s) {
    const int count = static_cast<int>(chain.m_states.size());
    Eigen::VectorXd h(count);
    for (int i = 0; i < count; ++i)
      h(i) = potts_energy(chain.m_states[static_cast<std::size_t>(i)]);
    const double mean = chain.measure.vec().dot(h);
    return Eigen::VectorXd(schedule.beta_prime(s) / n *
                           chain.measure.vec().cwiseProduct(
                               (h.array() - mean).matrix()));
  };

  const ProjectedPottsChain chain0 = chain_at(0.0);
  CurveSpec curve;
  curve.graph = chain0.graph;
  curve.grid = uniform_grid(0.0, 1.0, options.grid_nodes);
  curve.measure = [&chain_at](double s) { return chain_at(s).measure; };
  curve.capacity = [&chain_at](double s) { return chain_at(s).capacity; };
  curve.rate = [&chain_at, &rate_at](double s) {
    const ProjectedPottsChain chain = chain_at(s);
    return MassRate(rate_at(chain, s));
  };
  const ActionReport act = action(curve);
  report.action = act.value;
  report.action_refinement = act.refinement_error;

  report.T = options.T_override > 0.0 ? options.T_override
                                      : 2.0 * report.action / eps;
  const double dbeta = init.beta0 - beta_target;
  report.eta = (report.T > 0.0 && dbeta > 0.0)
                   ? eps / (24.0 * (q - 1) * dbeta * report.T)
                   : std::numeric_limits<double>::infinity();
  if (options.N_override > 0) {
    report.N = options.N_override;
  } else if (std::isfinite(report.eta)) {
    report.N = static_cast<long long>(
        std::max(1.0, std::ceil(1.0 / report.eta)));
  } else {
    report.N = 1;
  }

  AnnealConfig config;
  config.T = report.T;
  config.N = report.N;

  // Folded-space run from the projected mixture.
  {
    const int count = static_cast<int>(chain0.m_states.size());
    Eigen::VectorXd nu_folded(count);
    const double log_qn = n * std::log(static_cast<double>(q));
    for (int i = 0; i < count; ++i) {
      const std::vector<int>& m = chain0.m_states[static_cast<std::size_t>(i)];
      nu_folded(i) = eps / 6.0 *
                     std::exp(std::log(chain0.multiplicity(i)) +
                              log_multinomial(n, m) - log_qn);
      if (*std::max_element(m.begin(), m.end()) == n)
        nu_folded(i) += 1.0 - eps / 6.0;
    }
    const AnnealResult folded_run = run_exact(
        [&chain_at](double s) { return chain_at(s).kernel; }, config,
        ProbVector::normalized(nu_folded));
    report.kl_final_folded = kl(chain_at(1.0).measure.vec(),
                                folded_run.final_marginal->vec());
  }

  RateProvider full_kernels;
  if (init.nu && !options.skip_full_run) {
    full_kernels = [n, q, &schedule](double s) {
      return block_glauber_kernel(potts_distribution(n, q, schedule.beta(s)),
                                  q);
    };
    const AnnealResult full_run = run_exact(full_kernels, config, *init.nu);
    report.kl_final_full = kl(potts_distribution(n, q, beta_target).vec(),
                              full_run.final_marginal->vec());
    report.full_run = true;
  }

  const RateProvider delta_kernels =
      full_kernels ? full_kernels : RateProvider([&chain_at](double s) {
        return chain_at(s).kernel;
      });
  const long long stride =
      std::max<long long>(1, report.N / std::max(1, options.delta_probes));
  for (long long k = 1; k <= report.N; k += stride) {
    const double sk = static_cast<double>(k) / static_cast<double>(report.N);
    const double lo = static_cast<double>(k - 1) /
                      static_cast<double>(report.N);
    const Eigen::MatrixXd A = delta_kernels(sk).matrix();
    for (double sp : {lo, 0.5 * (lo + sk)}) {
      const Eigen::MatrixXd B = delta_kernels(sp).matrix();
      for (int x = 0; x < A.rows(); ++x)
        for (int y = 0; y < A.cols(); ++y) {
          if (x == y || A(x, y) == 0.0) continue;
          report.delta_measured = std::max(
              report.delta_measured, std::abs(B(x, y) / A(x, y) - 1.0));
        }
    }
  }

  if (report.T > 0.0) {
    report.bound = report.init_kl +
                   (1.0 + report.delta_measured) * report.action /
                       (4.0 * report.T) +
                   2.0 * report.delta_measured * report.T;
  } else {
    report.bound = report.action > 0.0
                       ? std::numeric_limits<double>::infinity()
                       : report.init_kl;
  }
  report.pass = report.kl_final_folded <= eps &&
                (!report.full_run || report.kl_final_full <= eps);
  const double kl_for_bound =
      report.full_run ? report.kl_final_full : report.kl_final_folded;
  report.bound_holds = kl_for_bound <= report.bound;
  report.elapsed_seconds = now_seconds() - start;
  return report;
}

}  // namespace ota
