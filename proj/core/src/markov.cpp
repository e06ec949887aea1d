#include "ota/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "ota/linalg.hpp"
#include "ota/rng.hpp"

namespace ota {

RateKernel::RateKernel(StateGraphPtr graph, Eigen::MatrixXd rates)
    : graph_(std::move(graph)), rates_(std::move(rates)) {
  if (!graph_) throw InvalidArgument("RateKernel: null graph");
  const int n = graph_->num_states();
  if (rates_.rows() != n || rates_.cols() != n) {
    throw InvalidArgument("RateKernel: matrix is " +
                          std::to_string(rates_.rows()) + "x" +
                          std::to_string(rates_.cols()) + " for " +
                          std::to_string(n) + " states");
  }
  for (int x = 0; x < n; ++x) {
    double row_abs = 0.0;
    for (int y = 0; y < n; ++y) {
      double r = rates_(x, y);
      if (!std::isfinite(r))
        throw InvalidArgument("RateKernel: non-finite rate at (" +
                              std::to_string(x) + "," + std::to_string(y) +
                              ")");
      if (x != y) {
        if (r < 0.0)
          throw InvalidArgument("RateKernel: negative off-diagonal rate at (" +
                                std::to_string(x) + "," + std::to_string(y) +
                                ")");
        if (r != 0.0 && !graph_->has_edge(x, y))
          throw InvalidArgument("RateKernel: rate off the edge set at (" +
                                std::to_string(x) + "," + std::to_string(y) +
                                ")");
      }
      row_abs += std::abs(r);
    }
    double row_sum = rates_.row(x).sum();
    if (std::abs(row_sum) > kSumTolerance * std::max(1.0, row_abs)) {
      throw InvalidArgument("RateKernel: row " + std::to_string(x) +
                            " sums to " + std::to_string(row_sum));
    }
  }
}

Capacity capacity_from_kernel(const RateKernel& kernel, const ProbVector& pi) {
  const StateGraph& g = *kernel.graph();
  if (pi.size() != g.num_states())
    throw InvalidArgument("capacity_from_kernel: dimension mismatch");
  Eigen::VectorXd w(g.num_edges());
  double worst_dev = 0.0;
  int worst_edge = -1;
  for (int e = 0; e < g.num_edges(); ++e) {
    const StateGraph::Edge& ed = g.edges()[e];
    double fwd = pi(ed.lo) * kernel(ed.lo, ed.hi);
    double bwd = pi(ed.hi) * kernel(ed.hi, ed.lo);
    double dev = std::abs(fwd - bwd) / (std::max(fwd, bwd) + 1e-14);
    if (dev > worst_dev) {
      worst_dev = dev;
      worst_edge = e;
    }
    w(e) = 0.5 * (fwd + bwd);
  }
  if (worst_dev > 1e-10) {
    const StateGraph::Edge& ed = g.edges()[worst_edge];
    throw NotReversible("detailed balance fails on edge (" +
                        std::to_string(ed.lo) + "," + std::to_string(ed.hi) +
                        "): relative deviation " + std::to_string(worst_dev));
  }
  return Capacity(kernel.graph(), std::move(w));
}

ReversiblePair make_reversible_pair(RateKernel kernel, ProbVector pi) {
  Capacity c = capacity_from_kernel(kernel, pi);
  return ReversiblePair{std::move(kernel), std::move(pi), std::move(c)};
}

double dirichlet_form(const Capacity& capacity, const Eigen::VectorXd& f,
                      const Eigen::VectorXd& g) {
  const StateGraph& gr = *capacity.graph();
  if (f.size() != gr.num_states() || g.size() != gr.num_states())
    throw InvalidArgument("dirichlet_form: dimension mismatch");
  double acc = 0.0;
  for (int e = 0; e < gr.num_edges(); ++e) {
    const StateGraph::Edge& ed = gr.edges()[e];
    acc += (f(ed.hi) - f(ed.lo)) * (g(ed.hi) - g(ed.lo)) * capacity.weight(e);
  }
  return acc;
}

EvolveResult evolve_fokker_planck(const ProbVector& mu0,
                                  const std::vector<KernelPiece>& pieces) {
  Eigen::VectorXd mu = mu0.vec();
  double drift = 0.0;
  int max_sq = 0;
  constexpr double kTheta13 = 5.371920351148152;
  for (const KernelPiece& piece : pieces) {
    if (!piece.kernel) throw InvalidArgument("evolve_fokker_planck: null kernel");
    if (!(piece.duration >= 0.0))
      throw InvalidArgument("evolve_fokker_planck: negative duration");
    if (piece.duration == 0.0) continue;
    if (piece.kernel->num_states() != mu.size())
      throw InvalidArgument("evolve_fokker_planck: dimension mismatch");
    Eigen::MatrixXd At = piece.duration * piece.kernel->matrix().transpose();
    double norm1 = At.cwiseAbs().colwise().sum().maxCoeff();
    int sq = 0;
    if (norm1 > kTheta13)
      sq = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    if (sq > 60)
      throw StiffnessWarning("evolve_fokker_planck: piece needs " +
                             std::to_string(sq) + " squarings");
    max_sq = std::max(max_sq, sq);
    mu = expm_apply(At, mu);
    double sum = mu.sum();
    drift = std::max(drift, std::abs(sum - 1.0));
    if (!(sum > 0.0))
      throw SingularSolve("evolve_fokker_planck: mass collapsed");
    mu /= sum;
    for (int i = 0; i < mu.size(); ++i) {
      // exact evolution preserves positivity; only rounding-level
      // underflow is clamped
      if (mu(i) <= 0.0) mu(i) = std::numeric_limits<double>::min();
    }
  }
  double sum = mu.sum();
  drift = std::max(drift, std::abs(sum - 1.0));
  mu /= sum;
  return EvolveResult{ProbVector(std::move(mu)), drift, max_sq};
}

double kl(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
  if (mu.size() != nu.size()) throw InvalidArgument("kl: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu(i) < 0.0 || nu(i) < 0.0)
      throw InvalidArgument("kl: negative entry");
    if (mu(i) == 0.0) continue;
    if (nu(i) == 0.0)
      throw AbsoluteContinuity("kl: nu vanishes at state " +
                               std::to_string(i) + " where mu does not");
    acc += mu(i) * std::log(mu(i) / nu(i));
  }
  return acc;
}

double chi2(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
  if (mu.size() != nu.size()) throw InvalidArgument("chi2: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu(i) < 0.0 || nu(i) < 0.0)
      throw InvalidArgument("chi2: negative entry");
    double d = mu(i) - nu(i);
    if (d == 0.0) continue;
    if (nu(i) == 0.0)
      throw AbsoluteContinuity("chi2: nu vanishes at state " +
                               std::to_string(i) + " where mu does not");
    acc += d * d / nu(i);
  }
  return acc;
}

double entropy_functional(const ProbVector& pi, const Eigen::VectorXd& f) {
  if (f.size() != pi.size())
    throw InvalidArgument("entropy_functional: dimension mismatch");
  double mean = 0.0, flogf = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    if (f(i) < 0.0)
      throw InvalidArgument("entropy_functional: f must be nonnegative");
    mean += pi(i) * f(i);
    if (f(i) > 0.0) flogf += pi(i) * f(i) * std::log(f(i));
  }
  if (mean == 0.0) return 0.0;
  return flogf - mean * std::log(mean);
}

double variance_functional(const ProbVector& pi, const Eigen::VectorXd& f) {
  if (f.size() != pi.size())
    throw InvalidArgument("variance_functional: dimension mismatch");
  double mean = 0.0;
  for (int i = 0; i < f.size(); ++i) mean += pi(i) * f(i);
  double var = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    double d = f(i) - mean;
    var += pi(i) * d * d;
  }
  return var;
}

double poincare_constant(const ReversiblePair& pair) {
  const StateGraph& g = *pair.kernel.graph();
  const int n = g.num_states();
  if (n < 2)
    throw InvalidArgument("poincare_constant: need at least 2 states");
  if (!is_connected(pair.capacity))
    throw DisconnectedCapacity(
        "poincare_constant: positive-capacity subgraph is disconnected");

  // Similarity transform of the generalized problem L_c v = lambda Pi v:
  // A = Pi^{-1/2} L_c Pi^{-1/2} is symmetric with the same spectrum.
  const Eigen::VectorXd& pi = pair.stationary.vec();
  Eigen::VectorXd isqrt = pi.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < g.num_edges(); ++e) {
    const StateGraph::Edge& ed = g.edges()[e];
    double c = pair.capacity.weight(e);
    A(ed.lo, ed.lo) += c / pi(ed.lo);
    A(ed.hi, ed.hi) += c / pi(ed.hi);
    double off = -c * isqrt(ed.lo) * isqrt(ed.hi);
    A(ed.lo, ed.hi) += off;
    A(ed.hi, ed.lo) += off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success)
    throw SingularSolve("poincare_constant: eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  double scale = std::max(1.0, std::abs(ev(n - 1)));
  double gap = ev(1);
  if (gap <= 1e-12 * scale)
    throw DisconnectedCapacity(
        "poincare_constant: spectral gap numerically zero");
  return 1.0 / gap;
}

namespace {

struct MlsiInstance {
  const ReversiblePair& pair;

  // Ratio Ent_pi[f] / E(log f, f) for strictly positive f; the constant
  // direction gives 0/0 and must be excluded by the caller.
  double ratio(const Eigen::VectorXd& f) const {
    Eigen::VectorXd logf = f.array().log();
    double ent = entropy_functional(pair.stationary, f);
    double e = dirichlet_form(pair.capacity, logf, f);
    if (e <= 0.0) return -1.0;  // numerically degenerate direction
    return ent / e;
  }
};

double mlsi_ascent(const MlsiInstance& inst, int n, std::uint64_t seed,
                   const Eigen::VectorXd* warm_start, double warm_value,
                   Eigen::VectorXd* best_f_out) {
  double best = warm_value;
  Eigen::VectorXd best_f =
      warm_start ? *warm_start : Eigen::VectorXd::Ones(n);
  CounterRng rng(seed, /*replicate=*/0, /*layer=*/1);
  const int restarts = 24;
  for (int r = 0; r <= restarts; ++r) {
    Eigen::VectorXd f(n);
    if (r == 0 && warm_start) {
      f = *warm_start;
    } else {
      for (int i = 0; i < n; ++i) f(i) = 0.05 + rng.next_double();
    }
    double cur = inst.ratio(f);
    double step = 0.5;
    while (step > 1e-9) {
      bool improved = false;
      for (int i = 0; i < n; ++i) {
        for (double mult : {1.0 + step, 1.0 / (1.0 + step)}) {
          Eigen::VectorXd g = f;
          g(i) *= mult;
          double v = inst.ratio(g);
          if (v > cur) {
            cur = v;
            f = g;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (cur > best) {
      best = cur;
      best_f = f;
    }
  }
  if (best_f_out) *best_f_out = best_f;
  return best;
}

double mlsi_grid_scan(const MlsiInstance& inst, int n, int resolution,
                      Eigen::VectorXd* argmax_out) {
  // Enumerate f = k/R with k_i >= 1 and sum k = R: the ratio is invariant
  // under scaling of f, so the positive simplex covers all directions.
  const int R = resolution;
  std::vector<double> logtab(R + 1, 0.0);
  for (int k = 1; k <= R; ++k) logtab[k] = std::log(static_cast<double>(k));

  const StateGraph& g = *inst.pair.kernel.graph();
  const Eigen::VectorXd& pi = inst.pair.stationary.vec();
  const int ne = g.num_edges();
  std::vector<int> elo(ne), ehi(ne);
  std::vector<double> ew(ne);
  for (int e = 0; e < ne; ++e) {
    elo[e] = g.edges()[e].lo;
    ehi[e] = g.edges()[e].hi;
    ew[e] = inst.pair.capacity.weight(e);
  }

  double best = 0.0;
  std::vector<int> best_k;
  std::vector<int> k(n, 1);

  auto eval = [&](const std::vector<int>& kk) {
    // Constant f has ratio 0/0; skip it.
    bool constant = true;
    for (int i = 1; i < n; ++i)
      if (kk[i] != kk[0]) {
        constant = false;
        break;
      }
    if (constant) return;
    double mean = 0.0, flogf = 0.0;
    for (int i = 0; i < n; ++i) {
      double fi = static_cast<double>(kk[i]);
      mean += pi(i) * fi;
      flogf += pi(i) * fi * logtab[kk[i]];
    }
    double ent = flogf - mean * std::log(mean);
    double en = 0.0;
    for (int e = 0; e < ne; ++e) {
      en += (logtab[kk[ehi[e]]] - logtab[kk[elo[e]]]) *
            (static_cast<double>(kk[ehi[e]]) - static_cast<double>(kk[elo[e]])) *
            ew[e];
    }
    if (en <= 0.0) return;
    double v = ent / en;  // scale 1/R cancels between Ent and E
    if (v > best) {
      best = v;
      best_k = kk;
    }
  };

  // All compositions of R into n positive parts, depth-first.
  auto recurse = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      k[pos] = remaining;
      eval(k);
      return;
    }
    int slots_after = n - 1 - pos;
    for (int v = 1; v <= remaining - slots_after; ++v) {
      k[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  recurse(recurse, 0, R);

  if (argmax_out) {
    argmax_out->resize(n);
    if (best_k.empty()) {
      argmax_out->setOnes();
    } else {
      for (int i = 0; i < n; ++i)
        (*argmax_out)(i) = static_cast<double>(best_k[i]);
    }
  }
  return best;
}

}  // namespace

MlsiReport mlsi_constant(const ReversiblePair& pair, MlsiMode mode,
                         int resolution, std::uint64_t seed) {
  const int n = pair.kernel.num_states();
  MlsiInstance inst{pair};
  if (mode == MlsiMode::Ascent) {
    double v = mlsi_ascent(inst, n, seed, nullptr, 0.0, nullptr);
    return MlsiReport{v, 0.0, MlsiMode::Ascent};
  }
  if (n > 4)
    throw TooLargeForGrid("mlsi_constant: exact grid limited to 4 states, got " +
                          std::to_string(n));
  if (resolution < 2 * n)
    throw InvalidArgument("mlsi_constant: resolution too small");

  Eigen::VectorXd argmax;
  double coarse = mlsi_grid_scan(inst, n, resolution / 2, nullptr);
  double fine = mlsi_grid_scan(inst, n, resolution, &argmax);
  // Polish from the grid argmax and rerun the ascent search so the grid
  // estimate dominates ascent mode for the same seed.
  double polished = mlsi_ascent(inst, n, seed, &argmax, fine, nullptr);
  double value = std::max(fine, polished);
  return MlsiReport{value, std::abs(fine - coarse), MlsiMode::ExactGrid};
}

double canonical_paths_congestion(const ReversiblePair& pair,
                                  const PathMap& paths) {
  const StateGraph& g = *pair.kernel.graph();
  const int n = g.num_states();
  const Eigen::VectorXd& pi = pair.stationary.vec();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(g.num_edges());
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      auto it = paths.find({x, y});
      if (it == paths.end())
        throw InvalidArgument("canonical_paths_congestion: no path for pair (" +
                              std::to_string(x) + "," + std::to_string(y) +
                              ")");
      const std::vector<int>& path = it->second;
      if (path.size() < 2 || path.front() != x || path.back() != y)
        throw BrokenPath("canonical_paths_congestion: path for (" +
                         std::to_string(x) + "," + std::to_string(y) +
                         ") has wrong endpoints");
      std::set<int> seen(path.begin(), path.end());
      if (seen.size() != path.size())
        throw BrokenPath("canonical_paths_congestion: path for (" +
                         std::to_string(x) + "," + std::to_string(y) +
                         ") is not simple");
      double len = static_cast<double>(path.size() - 1);
      double w = len * pi(x) * pi(y);
      for (size_t i = 0; i + 1 < path.size(); ++i) {
        int e = g.edge_index(path[i], path[i + 1]);
        if (e < 0)
          throw BrokenPath("canonical_paths_congestion: (" +
                           std::to_string(path[i]) + "," +
                           std::to_string(path[i + 1]) + ") is not an edge");
        load(e) += w;
      }
    }
  }
  double worst = 0.0;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (load(e) == 0.0) continue;
    double c = pair.capacity.weight(e);
    if (c <= 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, load(e) / c);
  }
  return worst;
}

}  // namespace ota
