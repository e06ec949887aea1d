#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ota/errors.hpp"

namespace ota {

// Tolerance used throughout for "sums to one" / "sums to zero" checks.
// Scaled by max(1, ||v||_1) before comparison.
inline constexpr double kSumTolerance = 1e-12;

// Undirected simple graph on states {0, ..., n-1} with canonical edges
// (lo < hi). Immutable after construction; shared between measures,
// capacities and kernels via StateGraphPtr.
class StateGraph {
public:
  struct Edge {
    int lo;
    int hi;
  };

  static std::shared_ptr<const StateGraph> make(
      int num_states, std::vector<std::pair<int, int>> edges);
  static std::shared_ptr<const StateGraph> path(int num_states);
  static std::shared_ptr<const StateGraph> complete(int num_states);

  int num_states() const { return num_states_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  // Neighbors of x in ascending order, aligned with incident_edges(x).
  const std::vector<int>& neighbors(int x) const { return adjacency_[x]; }
  const std::vector<int>& incident_edges(int x) const { return incident_[x]; }

  // Index into edges() of {x, y}, or -1 if not an edge.
  int edge_index(int x, int y) const;
  bool has_edge(int x, int y) const { return edge_index(x, y) >= 0; }

private:
  StateGraph() = default;

  int num_states_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::vector<int>> incident_;
};

using StateGraphPtr = std::shared_ptr<const StateGraph>;

// Strictly positive probability vector. Entries > 0, sum within
// kSumTolerance * max(1, ||v||_1) of 1.
class ProbVector {
public:
  explicit ProbVector(Eigen::VectorXd values);
  static ProbVector uniform(int n);
  // Rescales a nonnegative, not identically zero vector to sum one.
  static ProbVector normalized(Eigen::VectorXd values);

  int size() const { return static_cast<int>(values_.size()); }
  double operator()(int i) const { return values_(i); }
  const Eigen::VectorXd& vec() const { return values_; }

private:
  Eigen::VectorXd values_;
};

// Signed mass rate: entries sum to zero within kSumTolerance scale.
class MassRate {
public:
  explicit MassRate(Eigen::VectorXd values);

  int size() const { return static_cast<int>(values_.size()); }
  double operator()(int i) const { return values_(i); }
  const Eigen::VectorXd& vec() const { return values_; }

private:
  Eigen::VectorXd values_;
};

// Nonnegative symmetric edge weights on a StateGraph. Zero off-support.
class Capacity {
public:
  Capacity(StateGraphPtr graph, Eigen::VectorXd edge_weights);

  const StateGraphPtr& graph() const { return graph_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double weight(int edge) const { return weights_(edge); }
  // c(x, y); symmetric, zero for non-edges.
  double operator()(int x, int y) const;

private:
  StateGraphPtr graph_;
  Eigen::VectorXd weights_;
};

// Antisymmetric edge flux stored in canonical orientation: flux(e) is the
// signed flow from edges()[e].lo to edges()[e].hi.
class Flux {
public:
  Flux(StateGraphPtr graph, Eigen::VectorXd edge_flux);
  static Flux zero(StateGraphPtr graph);

  const StateGraphPtr& graph() const { return graph_; }
  const Eigen::VectorXd& values() const { return values_; }
  // J(x, y) = -J(y, x); zero for non-edges.
  double operator()(int x, int y) const;

private:
  StateGraphPtr graph_;
  Eigen::VectorXd values_;
};

// div J(x) = sum_y J(x, y); the result sums to zero by antisymmetry.
MassRate divergence(const Flux& flux);

// True if the subgraph of edges with capacity > 0 connects all states.
bool is_connected(const StateGraph& graph, const Eigen::VectorXd& edge_weights);
bool is_connected(const Capacity& capacity);

}  // namespace ota
