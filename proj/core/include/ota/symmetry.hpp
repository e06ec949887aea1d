#pragma once

#include <string>
#include <vector>

#include "ota/graph.hpp"
#include "ota/markov.hpp"

namespace ota {

// Surjective projection of a state space: a label per source state, the
// materialized fibers, and the projected graph (edge {a,b} present iff some
// fiber pair is adjacent in the source graph; self-loops dropped).
class Projection {
public:
  static Projection build(StateGraphPtr source, std::vector<int> labels,
                          int num_projected);
  static Projection identity(StateGraphPtr graph);

  const StateGraphPtr& source() const { return source_; }
  const StateGraphPtr& projected() const { return projected_; }
  int label(int x) const { return labels_[x]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::vector<int>>& fibers() const { return fibers_; }

private:
  Projection() = default;

  StateGraphPtr source_;
  StateGraphPtr projected_;
  std::vector<int> labels_;
  std::vector<std::vector<int>> fibers_;
};

// Pushforward: (proj_# mu)(a) = sum over the fiber of a.
ProbVector project_measure(const Projection& proj, const ProbVector& mu);
Eigen::VectorXd project_vector(const Projection& proj,
                               const Eigen::VectorXd& v);
MassRate project_rate(const Projection& proj, const MassRate& rate);

// Projected capacity: cbar(a,b) = sum over fiber(a) x fiber(b) of c(x,y).
Capacity project_capacity(const Projection& proj, const Capacity& capacity);

struct SymmetryReport {
  bool pass;
  double worst_measure_deviation;  // relative, within-fiber spread of pi
  double worst_kernel_deviation;   // relative, within-fiber pushforward rows
  int worst_fiber;
  std::string detail;
};

// Checks the symmetry hypothesis: pi constant on each fiber and the
// pushforward of every kernel row identical within each fiber, both to
// 1e-10 relative.
SymmetryReport verify_symmetry(const Projection& proj, const ProbVector& pi,
                               const RateKernel& kernel);

struct MetricGapReport {
  double full_value;       // squared metric derivative on the source space
  double projected_value;  // same on the projected space
  double relative_gap;
  SymmetryReport symmetry;
};

// Computes both squared metric derivatives for the given mass rate. The
// symmetry hypothesis is verified first and failure throws InvalidArgument:
// the conclusion does not hold without it. The projected capacity may be
// supplied (e.g. a closed form) instead of the fiber-summed default.
MetricGapReport compare_metric_derivative(
    const Projection& proj, const ProbVector& full_pi,
    const RateKernel& full_kernel, const MassRate& full_rate,
    const Capacity* projected_capacity = nullptr);

}  // namespace ota
