#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ota/graph.hpp"

namespace ota {

// Potential solving the discrete continuity equation; defined up to an
// additive constant, canonicalized to zero mean under a reference
// distribution.
struct Potential {
  Eigen::VectorXd values;
};

// Solves sum_y (psi(y) - psi(x)) c(x,y) = -rate(x) for psi, i.e. the
// weighted-Laplacian system L_c psi = rate. Residual is checked against
// 1e-10 * max(1, ||rate||_inf).
Potential solve_continuity_potential(const Capacity& capacity,
                                     const MassRate& rate,
                                     const ProbVector& reference);

struct MetricDerivative {
  double value;  // squared metric derivative
  Flux flux;     // optimal flux J(x,y) = (psi(y) - psi(x)) c(x,y)
  Potential potential;
};

// Squared metric derivative in the potential form, together with the
// optimal flux. The flux satisfies rate + div J = 0 within 1e-10.
MetricDerivative metric_derivative_sq(const Capacity& capacity,
                                      const MassRate& rate,
                                      const ProbVector& reference);

// (1/2) sum_{x,y} J(x,y)^2 / c(x,y) = sum over edges of J_e^2 / c_e.
// Any admissible flux with the same divergence costs at least the metric
// derivative.
double flux_cost(const Capacity& capacity, const Flux& flux);

// W_{c,2}(mu, nu): metric derivative with rate = nu - mu, square-rooted.
double wc2_distance(const Capacity& capacity, const ProbVector& mu,
                    const ProbVector& nu);

// A curve of measures with its capacities on a shared graph. The grid must
// be uniform with an odd number of nodes (composite Simpson). When no rate
// evaluator is given, central finite differences of the measure are used
// (one-sided second order at the endpoints); when one is given it is
// validated against finite differences at every interior node.
struct CurveSpec {
  StateGraphPtr graph;
  std::vector<double> grid;
  std::function<ProbVector(double)> measure;
  std::function<Capacity(double)> capacity;
  std::function<MassRate(double)> rate;  // optional
  double fd_step = 1e-5;
  double fd_consistency_tol = 1e-6;
};

// Uniform grid of `nodes` points over [lo, hi]; nodes must be odd and >= 3.
std::vector<double> uniform_grid(double lo, double hi, int nodes = 201);

// Throws InvalidArgument (grid/evaluator shape) or propagates evaluator
// errors; checks rate-vs-finite-difference consistency when rate is given.
void validate_curve(const CurveSpec& curve);

struct ActionReport {
  double value;
  std::vector<double> grid;
  std::vector<double> metric_derivative_sq;  // per grid node
  std::string quadrature;                    // rule name
  double refinement_error;                   // |fine - coarse| estimate
};

// Integrates the squared metric derivative along the curve with composite
// Simpson on the curve's grid; the refinement error compares against the
// half-resolution rule. Solver failures are annotated with the grid node.
ActionReport action(const CurveSpec& curve);

}  // namespace ota
