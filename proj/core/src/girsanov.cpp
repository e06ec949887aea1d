#include "ota/girsanov.hpp"

#include <cmath>
#include <string>

namespace ota {

double psi(double r) {
  if (r < 0.0)
    throw NegativeRate("psi: argument " + std::to_string(r) + " is negative");
  if (r == 0.0) return 1.0;
  return r * std::log(r) - r + 1.0;
}

double edge_kl_cost(double rho) {
  return rho * std::asinh(0.5 * rho) -
         2.0 * std::sqrt(1.0 + 0.25 * rho * rho) + 2.0;
}

RateKernel reference_kernel(const RateKernel& p, const Capacity& capacity,
                            const Flux& flux) {
  const StateGraph& g = *p.graph();
  if (capacity.graph()->num_edges() != g.num_edges() ||
      flux.graph()->num_edges() != g.num_edges())
    throw InvalidArgument("reference_kernel: mismatched graphs");

  Eigen::MatrixXd q = p.matrix();
  for (int e = 0; e < g.num_edges(); ++e) {
    const StateGraph::Edge& ed = g.edges()[e];
    double c = capacity.weight(e);
    double j = flux.values()(e);  // flow lo -> hi
    if (c <= 0.0) {
      if (j != 0.0)
        throw ZeroCapacityEdge("reference_kernel: flux " + std::to_string(j) +
                               " on zero-capacity edge (" +
                               std::to_string(ed.lo) + "," +
                               std::to_string(ed.hi) + ")");
      continue;  // rho = 0, q = p on this edge
    }
    double rho = j / c;
    double root = std::sqrt(1.0 + 0.25 * rho * rho);
    q(ed.lo, ed.hi) = p(ed.lo, ed.hi) * (root + 0.5 * rho);
    q(ed.hi, ed.lo) = p(ed.hi, ed.lo) * (root - 0.5 * rho);
  }
  for (int x = 0; x < g.num_states(); ++x) {
    q(x, x) = 0.0;
    q(x, x) = -q.row(x).sum();
  }
  return RateKernel(p.graph(), std::move(q));
}

namespace {

double girsanov_integrand(const RateKernel& p, const RateKernel& q,
                          const ProbVector& mu, const PathKlOptions& options,
                          double t) {
  const StateGraph& g = *p.graph();
  double acc = 0.0;
  for (int e = 0; e < g.num_edges(); ++e) {
    const StateGraph::Edge& ed = g.edges()[e];
    for (int dir = 0; dir < 2; ++dir) {
      int x = dir == 0 ? ed.lo : ed.hi;
      int y = dir == 0 ? ed.hi : ed.lo;
      double pr = p(x, y), qr = q(x, y);
      if (pr > options.rate_cap || qr > options.rate_cap)
        throw RateCapExceeded("path_kl: rate " +
                              std::to_string(std::max(pr, qr)) +
                              " above cap " + std::to_string(options.rate_cap) +
                              " at t = " + std::to_string(t));
      double term;
      if (pr == 0.0) {
        term = qr;
      } else {
        if (qr == 0.0)
          throw SupportMismatch("path_kl: p > 0 but q = 0 on edge (" +
                                std::to_string(x) + "," + std::to_string(y) +
                                ") at t = " + std::to_string(t));
        term = pr * std::log(pr / qr) - (pr - qr);
      }
      acc += mu(x) * term;
    }
  }
  return acc;
}

}  // namespace

double path_kl(const KernelSchedule& p_sched, const KernelSchedule& q_sched,
               const MarginalSchedule& mu_sched, double init_kl,
               const std::vector<double>& time_grid,
               const PathKlOptions& options, double* refinement_error) {
  if (time_grid.size() < 3 || time_grid.size() % 2 == 0)
    throw InvalidArgument("path_kl: grid must have an odd number of nodes");
  const size_t m = time_grid.size();
  double h = time_grid[1] - time_grid[0];
  if (!(h > 0.0)) throw InvalidArgument("path_kl: grid must be increasing");
  for (size_t i = 1; i < m; ++i) {
    if (std::abs(time_grid[i] - time_grid[i - 1] - h) >
        1e-9 * std::max(1.0, h))
      throw InvalidArgument("path_kl: grid must be uniform");
  }

  std::vector<double> f(m);
  for (size_t i = 0; i < m; ++i) {
    double t = time_grid[i];
    RateKernel p = p_sched(t);
    RateKernel q = q_sched(t);
    if (p.num_states() != q.num_states())
      throw InvalidArgument("path_kl: kernel dimension mismatch");
    f[i] = girsanov_integrand(p, q, mu_sched(t), options, t);
  }

  auto simpson = [&](size_t stride) {
    double acc = 0.0;
    for (size_t i = 0; i + 2 * stride < m; i += 2 * stride)
      acc += f[i] + 4.0 * f[i + stride] + f[i + 2 * stride];
    return acc * (h * stride) / 3.0;
  };
  double fine = simpson(1);
  if (refinement_error) {
    if ((m - 1) % 4 == 0) {
      *refinement_error = std::abs(fine - simpson(2));
    } else {
      double trap = 0.0;
      for (size_t i = 0; i + 1 < m; ++i) trap += 0.5 * h * (f[i] + f[i + 1]);
      *refinement_error = std::abs(fine - trap);
    }
  }
  return init_kl + fine;
}

}  // namespace ota
