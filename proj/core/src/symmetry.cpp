#include "ota/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ota/transport.hpp"

namespace ota {

Projection Projection::build(StateGraphPtr source, std::vector<int> labels,
                             int num_projected) {
  if (!source) throw InvalidArgument("Projection: null source graph");
  const int n = source->num_states();
  if (static_cast<int>(labels.size()) != n)
    throw InvalidArgument("Projection: label count mismatch");
  if (num_projected <= 0)
    throw InvalidArgument("Projection: num_projected must be positive");

  Projection proj;
  proj.source_ = std::move(source);
  proj.labels_ = std::move(labels);
  proj.fibers_.resize(num_projected);
  for (int x = 0; x < n; ++x) {
    int a = proj.labels_[x];
    if (a < 0 || a >= num_projected)
      throw InvalidArgument("Projection: label " + std::to_string(a) +
                            " out of range at state " + std::to_string(x));
    proj.fibers_[a].push_back(x);
  }
  for (int a = 0; a < num_projected; ++a) {
    if (proj.fibers_[a].empty())
      throw InvalidArgument("Projection: label " + std::to_string(a) +
                            " has an empty fiber (map not surjective)");
  }

  std::set<std::pair<int, int>> edges;
  for (const StateGraph::Edge& ed : proj.source_->edges()) {
    int a = proj.labels_[ed.lo], b = proj.labels_[ed.hi];
    if (a == b) continue;
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  proj.projected_ = StateGraph::make(
      num_projected, {edges.begin(), edges.end()});
  return proj;
}

Projection Projection::identity(StateGraphPtr graph) {
  if (!graph) throw InvalidArgument("Projection::identity: null graph");
  const int n = graph->num_states();
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i;
  return build(std::move(graph), std::move(labels), n);
}

Eigen::VectorXd project_vector(const Projection& proj,
                               const Eigen::VectorXd& v) {
  if (v.size() != proj.source()->num_states())
    throw InvalidArgument("project_vector: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(proj.projected()->num_states());
  for (int x = 0; x < v.size(); ++x) out(proj.label(x)) += v(x);
  return out;
}

ProbVector project_measure(const Projection& proj, const ProbVector& mu) {
  return ProbVector(project_vector(proj, mu.vec()));
}

MassRate project_rate(const Projection& proj, const MassRate& rate) {
  return MassRate(project_vector(proj, rate.vec()));
}

Capacity project_capacity(const Projection& proj, const Capacity& capacity) {
  if (capacity.graph()->num_states() != proj.source()->num_states())
    throw InvalidArgument("project_capacity: dimension mismatch");
  const StateGraph& src = *capacity.graph();
  const StateGraph& dst = *proj.projected();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dst.num_edges());
  for (int e = 0; e < src.num_edges(); ++e) {
    const StateGraph::Edge& ed = src.edges()[e];
    int a = proj.label(ed.lo), b = proj.label(ed.hi);
    if (a == b) continue;
    int pe = dst.edge_index(a, b);
    if (pe < 0)
      throw InvalidArgument("project_capacity: projected edge missing");
    w(pe) += capacity.weight(e);
  }
  return Capacity(proj.projected(), std::move(w));
}

SymmetryReport verify_symmetry(const Projection& proj, const ProbVector& pi,
                               const RateKernel& kernel) {
  const int n = proj.source()->num_states();
  if (pi.size() != n || kernel.num_states() != n)
    throw InvalidArgument("verify_symmetry: dimension mismatch");
  const int k = proj.projected()->num_states();

  double worst_measure = 0.0, worst_kernel = 0.0;
  int worst_fiber = -1;
  const double tol = 1e-10;

  for (int a = 0; a < k; ++a) {
    const std::vector<int>& fiber = proj.fibers()[a];
    double lo = pi(fiber[0]), hi = lo;
    for (int x : fiber) {
      lo = std::min(lo, pi(x));
      hi = std::max(hi, pi(x));
    }
    double mdev = (hi - lo) / hi;
    if (mdev > worst_measure) {
      worst_measure = mdev;
      if (mdev > tol) worst_fiber = a;
    }

    Eigen::VectorXd first;
    for (size_t i = 0; i < fiber.size(); ++i) {
      Eigen::VectorXd push =
          project_vector(proj, kernel.matrix().row(fiber[i]).transpose());
      if (i == 0) {
        first = push;
        continue;
      }
      double scale = std::max(first.cwiseAbs().maxCoeff(), 1e-14);
      double kdev = (push - first).cwiseAbs().maxCoeff() / scale;
      if (kdev > worst_kernel) {
        worst_kernel = kdev;
        if (kdev > tol) worst_fiber = a;
      }
    }
  }

  bool pass = worst_measure <= tol && worst_kernel <= tol;
  std::string detail;
  if (!pass) {
    detail = "symmetry violated at fiber " + std::to_string(worst_fiber) +
             ": measure spread " + std::to_string(worst_measure) +
             ", pushforward spread " + std::to_string(worst_kernel);
  }
  return SymmetryReport{pass, worst_measure, worst_kernel, worst_fiber,
                        std::move(detail)};
}

MetricGapReport compare_metric_derivative(const Projection& proj,
                                          const ProbVector& full_pi,
                                          const RateKernel& full_kernel,
                                          const MassRate& full_rate,
                                          const Capacity* projected_capacity) {
  SymmetryReport sym = verify_symmetry(proj, full_pi, full_kernel);
  if (!sym.pass)
    throw InvalidArgument("compare_metric_derivative: " + sym.detail);

  Capacity full_cap = capacity_from_kernel(full_kernel, full_pi);
  ProbVector ref_full = ProbVector::uniform(full_pi.size());
  double full_value =
      metric_derivative_sq(full_cap, full_rate, ref_full).value;

  Capacity proj_cap = projected_capacity
                          ? *projected_capacity
                          : project_capacity(proj, full_cap);
  MassRate proj_rate = project_rate(proj, full_rate);
  ProbVector ref_proj = ProbVector::uniform(proj.projected()->num_states());
  double proj_value =
      metric_derivative_sq(proj_cap, proj_rate, ref_proj).value;

  double denom = std::max({std::abs(full_value), std::abs(proj_value), 1e-300});
  double gap = std::abs(full_value - proj_value) / denom;
  return MetricGapReport{full_value, proj_value, gap, std::move(sym)};
}

}  // namespace ota
