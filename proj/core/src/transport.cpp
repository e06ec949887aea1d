#include "ota/transport.hpp"

#include <cmath>
#include <utility>

namespace ota {

Potential solve_continuity_potential(const Capacity& capacity,
                                     const MassRate& rate,
                                     const ProbVector& reference) {
  const StateGraph& g = *capacity.graph();
  const int n = g.num_states();
  if (rate.size() != n || reference.size() != n)
    throw InvalidArgument("solve_continuity_potential: dimension mismatch");
  if (!is_connected(capacity))
    throw DisconnectedCapacity(
        "solve_continuity_potential: positive-capacity subgraph disconnected");

  if (n == 1) return Potential{Eigen::VectorXd::Zero(1)};

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < g.num_edges(); ++e) {
    const StateGraph::Edge& ed = g.edges()[e];
    double c = capacity.weight(e);
    L(ed.lo, ed.lo) += c;
    L(ed.hi, ed.hi) += c;
    L(ed.lo, ed.hi) -= c;
    L(ed.hi, ed.lo) -= c;
  }

  // Pin psi(0) = 0 by solving the principal minor, then shift the gauge.
  Eigen::MatrixXd L0 = L.bottomRightCorner(n - 1, n - 1);
  Eigen::VectorXd b0 = rate.vec().tail(n - 1);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(L0);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(n);
  if (ldlt.info() == Eigen::Success) {
    psi.tail(n - 1) = ldlt.solve(b0);
  }
  double scale = std::max(1.0, rate.vec().cwiseAbs().maxCoeff());
  double resid = (L * psi - rate.vec()).cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !psi.allFinite() ||
      resid > 1e-10 * scale) {
    // One refinement pass before giving up.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(L0);
    psi.setZero();
    psi.tail(n - 1) = lu.solve(b0);
    resid = (L * psi - rate.vec()).cwiseAbs().maxCoeff();
    if (!psi.allFinite() || resid > 1e-10 * scale)
      throw SingularSolve("solve_continuity_potential: residual " +
                          std::to_string(resid) + " exceeds tolerance");
  }

  psi.array() -= psi.dot(reference.vec());
  return Potential{std::move(psi)};
}

MetricDerivative metric_derivative_sq(const Capacity& capacity,
                                      const MassRate& rate,
                                      const ProbVector& reference) {
  Potential pot = solve_continuity_potential(capacity, rate, reference);
  const StateGraph& g = *capacity.graph();
  Eigen::VectorXd j(g.num_edges());
  double msq = 0.0;
  for (int e = 0; e < g.num_edges(); ++e) {
    const StateGraph::Edge& ed = g.edges()[e];
    double dpsi = pot.values(ed.hi) - pot.values(ed.lo);
    double c = capacity.weight(e);
    j(e) = dpsi * c;  // flow lo -> hi
    msq += dpsi * dpsi * c;
  }
  return MetricDerivative{msq, Flux(capacity.graph(), std::move(j)),
                          std::move(pot)};
}

double flux_cost(const Capacity& capacity, const Flux& flux) {
  const StateGraph& g = *capacity.graph();
  if (flux.values().size() != g.num_edges())
    throw InvalidArgument("flux_cost: flux and capacity graphs differ");
  double acc = 0.0;
  for (int e = 0; e < g.num_edges(); ++e) {
    double j = flux.values()(e);
    if (j == 0.0) continue;
    double c = capacity.weight(e);
    if (c <= 0.0) {
      const StateGraph::Edge& ed = g.edges()[e];
      throw ZeroCapacityEdge("flux_cost: nonzero flux on zero-capacity edge (" +
                             std::to_string(ed.lo) + "," +
                             std::to_string(ed.hi) + ")");
    }
    acc += j * j / c;
  }
  return acc;
}

double wc2_distance(const Capacity& capacity, const ProbVector& mu,
                    const ProbVector& nu) {
  Eigen::VectorXd d = nu.vec() - mu.vec();
  // Both inputs carry their own 1e-12 normalization slack; project the
  // difference back onto the zero-sum tangent space before validating.
  d.array() -= d.sum() / d.size();
  MassRate rate(std::move(d));
  ProbVector ref = ProbVector::uniform(mu.size());
  return std::sqrt(metric_derivative_sq(capacity, rate, ref).value);
}

std::vector<double> uniform_grid(double lo, double hi, int nodes) {
  if (nodes < 3 || nodes % 2 == 0)
    throw InvalidArgument("uniform_grid: nodes must be odd and >= 3");
  if (!(hi > lo)) throw InvalidArgument("uniform_grid: need hi > lo");
  std::vector<double> grid(nodes);
  double h = (hi - lo) / (nodes - 1);
  for (int i = 0; i < nodes; ++i) grid[i] = lo + h * i;
  grid.back() = hi;
  return grid;
}

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 3 || grid.size() % 2 == 0)
    throw InvalidArgument("curve grid must have an odd number (>= 3) of nodes");
  double h = grid[1] - grid[0];
  if (!(h > 0.0)) throw InvalidArgument("curve grid must be increasing");
  for (size_t i = 1; i < grid.size(); ++i) {
    double step = grid[i] - grid[i - 1];
    if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw InvalidArgument("curve grid must be uniform");
  }
}

MassRate fd_rate(const CurveSpec& curve, size_t node) {
  const double h = curve.fd_step;
  const double s = curve.grid[node];
  const double lo = curve.grid.front(), hi = curve.grid.back();
  Eigen::VectorXd d;
  if (s - h >= lo && s + h <= hi) {
    d = (curve.measure(s + h).vec() - curve.measure(s - h).vec()) / (2.0 * h);
  } else if (s + 2.0 * h <= hi) {
    // One-sided second-order at the left end.
    d = (-3.0 * curve.measure(s).vec() + 4.0 * curve.measure(s + h).vec() -
         curve.measure(s + 2.0 * h).vec()) /
        (2.0 * h);
  } else {
    d = (3.0 * curve.measure(s).vec() - 4.0 * curve.measure(s - h).vec() +
         curve.measure(s - 2.0 * h).vec()) /
        (2.0 * h);
  }
  // Finite differences of exactly-normalized measures sum to zero up to
  // rounding amplified by 1/h; project back onto the tangent space.
  d.array() -= d.sum() / d.size();
  return MassRate(std::move(d));
}

double simpson(const std::vector<double>& grid, const std::vector<double>& f,
               size_t stride) {
  double h = (grid[stride] - grid[0]);
  double acc = 0.0;
  for (size_t i = 0; i + 2 * stride < grid.size(); i += 2 * stride)
    acc += f[i] + 4.0 * f[i + stride] + f[i + 2 * stride];
  return acc * h / 3.0;
}

}  // namespace

void validate_curve(const CurveSpec& curve) {
  if (!curve.graph) throw InvalidArgument("curve: null graph");
  if (!curve.measure || !curve.capacity)
    throw InvalidArgument("curve: measure and capacity evaluators required");
  check_grid(curve.grid);
  if (!curve.rate) return;
  for (size_t i = 0; i < curve.grid.size(); ++i) {
    Eigen::VectorXd analytic = curve.rate(curve.grid[i]).vec();
    Eigen::VectorXd fd = fd_rate(curve, i).vec();
    double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
    double dev = (analytic - fd).cwiseAbs().maxCoeff();
    if (dev > curve.fd_consistency_tol * scale)
      throw InvalidArgument(
          "curve: rate evaluator disagrees with finite differences at s = " +
          std::to_string(curve.grid[i]) + " (deviation " +
          std::to_string(dev) + ")");
  }
}

ActionReport action(const CurveSpec& curve) {
  validate_curve(curve);
  const size_t m = curve.grid.size();
  std::vector<double> msq(m);
  for (size_t i = 0; i < m; ++i) {
    double s = curve.grid[i];
    try {
      ProbVector pi_s = curve.measure(s);
      MassRate rate = curve.rate ? curve.rate(s) : fd_rate(curve, i);
      Capacity cap = curve.capacity(s);
      msq[i] = metric_derivative_sq(cap, rate, pi_s).value;
    } catch (const DisconnectedCapacity& err) {
      throw DisconnectedCapacity(std::string(err.what()) + " at grid node s = " +
                                 std::to_string(s));
    } catch (const SingularSolve& err) {
      throw SingularSolve(std::string(err.what()) + " at grid node s = " +
                          std::to_string(s));
    }
  }
  double fine = simpson(curve.grid, msq, 1);
  double refinement;
  if ((m - 1) % 4 == 0) {
    refinement = std::abs(fine - simpson(curve.grid, msq, 2));
  } else {
    // Coarse Simpson needs (m-1) divisible by 4; fall back to comparing
    // against the trapezoid rule on the full grid.
    double trap = 0.0;
    double h = curve.grid[1] - curve.grid[0];
    for (size_t i = 0; i + 1 < m; ++i) trap += 0.5 * h * (msq[i] + msq[i + 1]);
    refinement = std::abs(fine - trap);
  }
  return ActionReport{fine, curve.grid, std::move(msq), "composite-simpson",
                      refinement};
}

}  // namespace ota
