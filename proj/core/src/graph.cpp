#include "ota/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace ota {

std::shared_ptr<const StateGraph> StateGraph::make(
    int num_states, std::vector<std::pair<int, int>> edges) {
  if (num_states <= 0) {
    throw InvalidArgument("StateGraph: num_states must be positive, got " +
                          std::to_string(num_states));
  }
  auto g = std::shared_ptr<StateGraph>(new StateGraph());
  g->num_states_ = num_states;

  std::set<std::pair<int, int>> seen;
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_states || b >= num_states) {
      throw InvalidArgument("StateGraph: edge (" + std::to_string(a) + ", " +
                            std::to_string(b) + ") out of range");
    }
    if (a == b) {
      throw InvalidArgument("StateGraph: self-loop at state " +
                            std::to_string(a));
    }
    int lo = std::min(a, b), hi = std::max(a, b);
    if (!seen.insert({lo, hi}).second) {
      throw InvalidArgument("StateGraph: duplicate edge (" +
                            std::to_string(lo) + ", " + std::to_string(hi) +
                            ")");
    }
  }
  g->edges_.reserve(seen.size());
  for (auto& [lo, hi] : seen) g->edges_.push_back({lo, hi});

  g->adjacency_.resize(num_states);
  g->incident_.resize(num_states);
  for (int e = 0; e < g->num_edges(); ++e) {
    const Edge& ed = g->edges_[e];
    g->adjacency_[ed.lo].push_back(ed.hi);
    g->incident_[ed.lo].push_back(e);
    g->adjacency_[ed.hi].push_back(ed.lo);
    g->incident_[ed.hi].push_back(e);
  }
  // Sort each adjacency list and keep incident edge ids aligned.
  for (int x = 0; x < num_states; ++x) {
    auto& adj = g->adjacency_[x];
    auto& inc = g->incident_[x];
    std::vector<int> order(adj.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return adj[i] < adj[j]; });
    std::vector<int> adj2(adj.size()), inc2(inc.size());
    for (size_t i = 0; i < order.size(); ++i) {
      adj2[i] = adj[order[i]];
      inc2[i] = inc[order[i]];
    }
    adj = std::move(adj2);
    inc = std::move(inc2);
  }
  return g;
}

std::shared_ptr<const StateGraph> StateGraph::path(int num_states) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < num_states; ++i) edges.push_back({i, i + 1});
  return make(num_states, std::move(edges));
}

std::shared_ptr<const StateGraph> StateGraph::complete(int num_states) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < num_states; ++i)
    for (int j = i + 1; j < num_states; ++j) edges.push_back({i, j});
  return make(num_states, std::move(edges));
}

int StateGraph::edge_index(int x, int y) const {
  if (x < 0 || y < 0 || x >= num_states_ || y >= num_states_ || x == y)
    return -1;
  const auto& adj = adjacency_[x];
  auto it = std::lower_bound(adj.begin(), adj.end(), y);
  if (it == adj.end() || *it != y) return -1;
  return incident_[x][static_cast<size_t>(it - adj.begin())];
}

namespace {

void check_sum(const Eigen::VectorXd& v, double target, const char* what) {
  double scale = std::max(1.0, v.cwiseAbs().sum());
  if (std::abs(v.sum() - target) > kSumTolerance * scale) {
    throw InvalidArgument(std::string(what) + ": entries sum to " +
                          std::to_string(v.sum()) + ", expected " +
                          std::to_string(target));
  }
}

}  // namespace

ProbVector::ProbVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0)
    throw InvalidArgument("ProbVector: empty vector");
  for (int i = 0; i < values_.size(); ++i) {
    if (!(values_(i) > 0.0)) {
      throw InvalidArgument("ProbVector: entry " + std::to_string(i) +
                            " is " + std::to_string(values_(i)) +
                            ", must be strictly positive");
    }
  }
  check_sum(values_, 1.0, "ProbVector");
}

ProbVector ProbVector::uniform(int n) {
  if (n <= 0) throw InvalidArgument("ProbVector::uniform: n must be positive");
  return ProbVector(Eigen::VectorXd::Constant(n, 1.0 / n));
}

ProbVector ProbVector::normalized(Eigen::VectorXd values) {
  if (values.size() == 0)
    throw InvalidArgument("ProbVector::normalized: empty vector");
  for (int i = 0; i < values.size(); ++i) {
    if (values(i) < 0.0) {
      throw InvalidArgument("ProbVector::normalized: negative entry at " +
                            std::to_string(i));
    }
  }
  double s = values.sum();
  if (!(s > 0.0))
    throw InvalidArgument("ProbVector::normalized: vector sums to zero");
  return ProbVector(values / s);
}

MassRate::MassRate(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw InvalidArgument("MassRate: empty vector");
  check_sum(values_, 0.0, "MassRate");
}

Capacity::Capacity(StateGraphPtr graph, Eigen::VectorXd edge_weights)
    : graph_(std::move(graph)), weights_(std::move(edge_weights)) {
  if (!graph_) throw InvalidArgument("Capacity: null graph");
  if (weights_.size() != graph_->num_edges()) {
    throw InvalidArgument("Capacity: got " + std::to_string(weights_.size()) +
                          " weights for " +
                          std::to_string(graph_->num_edges()) + " edges");
  }
  for (int e = 0; e < weights_.size(); ++e) {
    if (!std::isfinite(weights_(e)) || weights_(e) < 0.0) {
      throw InvalidArgument("Capacity: weight on edge " + std::to_string(e) +
                            " is " + std::to_string(weights_(e)) +
                            ", must be finite and nonnegative");
    }
  }
}

double Capacity::operator()(int x, int y) const {
  int e = graph_->edge_index(x, y);
  return e < 0 ? 0.0 : weights_(e);
}

Flux::Flux(StateGraphPtr graph, Eigen::VectorXd edge_flux)
    : graph_(std::move(graph)), values_(std::move(edge_flux)) {
  if (!graph_) throw InvalidArgument("Flux: null graph");
  if (values_.size() != graph_->num_edges()) {
    throw InvalidArgument("Flux: got " + std::to_string(values_.size()) +
                          " values for " + std::to_string(graph_->num_edges()) +
                          " edges");
  }
  for (int e = 0; e < values_.size(); ++e) {
    if (!std::isfinite(values_(e))) {
      throw InvalidArgument("Flux: non-finite value on edge " +
                            std::to_string(e));
    }
  }
}

Flux Flux::zero(StateGraphPtr graph) {
  if (!graph) throw InvalidArgument("Flux::zero: null graph");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(graph->num_edges());
  return Flux(std::move(graph), std::move(v));
}

double Flux::operator()(int x, int y) const {
  int e = graph_->edge_index(x, y);
  if (e < 0) return 0.0;
  const StateGraph::Edge& ed = graph_->edges()[e];
  return x == ed.lo ? values_(e) : -values_(e);
}

MassRate divergence(const Flux& flux) {
  const StateGraph& g = *flux.graph();
  Eigen::VectorXd div = Eigen::VectorXd::Zero(g.num_states());
  for (int e = 0; e < g.num_edges(); ++e) {
    const StateGraph::Edge& ed = g.edges()[e];
    div(ed.lo) += flux.values()(e);
    div(ed.hi) -= flux.values()(e);
  }
  // Exact pairwise cancellation can still leave the sum a few ulps from
  // zero; renormalizing here would hide real bugs, so hand the raw vector
  // to MassRate and let its tolerance decide.
  return MassRate(std::move(div));
}

bool is_connected(const StateGraph& graph, const Eigen::VectorXd& edge_weights) {
  if (edge_weights.size() != graph.num_edges()) {
    throw InvalidArgument("is_connected: weight count mismatch");
  }
  int n = graph.num_states();
  if (n <= 1) return true;
  std::vector<char> visited(n, 0);
  std::deque<int> queue{0};
  visited[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    const auto& adj = graph.neighbors(x);
    const auto& inc = graph.incident_edges(x);
    for (size_t i = 0; i < adj.size(); ++i) {
      if (edge_weights(inc[i]) > 0.0 && !visited[adj[i]]) {
        visited[adj[i]] = 1;
        ++count;
        queue.push_back(adj[i]);
      }
    }
  }
  return count == n;
}

bool is_connected(const Capacity& capacity) {
  return is_connected(*capacity.graph(), capacity.weights());
}

}  // namespace ota
