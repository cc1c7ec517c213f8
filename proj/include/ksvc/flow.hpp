#pragma once

// Exact combinatorial solvers: min-cost max-flow with lower bounds, and
// min-cost bipartite matching of a prescribed size.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <utility>
#include <vector>

#include "ksvc/errors.hpp"

namespace ksvc::flow {

inline constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max() / 4;
inline constexpr double kPotentialTolerance = 1e-12;

struct Arc {
  std::size_t from;
  std::size_t to;
  std::int64_t lower;
  std::int64_t capacity;
  double cost;
};

class FlowNetwork {
 public:
  FlowNetwork(std::size_t nodes, std::size_t source, std::size_t sink)
      : nodes_(nodes), source_(source), sink_(sink) {
    if (source >= nodes || sink >= nodes || source == sink) {
      throw DomainError("flow network: source and sink must be distinct valid nodes");
    }
  }

  std::size_t add_node() { return nodes_++; }

  std::size_t add_arc(std::size_t from, std::size_t to, std::int64_t lower, std::int64_t capacity,
                      double cost) {
    if (from >= nodes_ || to >= nodes_) throw DomainError("flow network: arc endpoint out of range");
    if (lower < 0 || lower > capacity) throw DomainError("flow network: need 0 <= lower <= capacity");
    if (!std::isfinite(cost)) throw DomainError("flow network: arc cost must be finite");
    arcs_.push_back({from, to, lower, std::min(capacity, kUnbounded), cost});
    return arcs_.size() - 1;
  }

  std::size_t nodes() const { return nodes_; }
  std::size_t source() const { return source_; }
  std::size_t sink() const { return sink_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

 private:
  std::size_t nodes_;
  std::size_t source_;
  std::size_t sink_;
  std::vector<Arc> arcs_;
};

struct FlowResult {
  std::vector<std::int64_t> flow;  // one entry per arc, in insertion order
  std::int64_t value = 0;
  double cost = 0.0;
};

namespace detail {

// Residual graph; edge e and e^1 are a forward/backward pair.
class Residual {
 public:
  struct Edge {
    std::size_t to;
    std::int64_t cap;
    double cost;
  };

  explicit Residual(std::size_t n) : adj_(n) {}

  std::size_t add(std::size_t u, std::size_t v, std::int64_t cap, double cost) {
    adj_[u].push_back(edges_.size());
    edges_.push_back({v, cap, cost});
    adj_[v].push_back(edges_.size());
    edges_.push_back({u, 0, -cost});
    return edges_.size() - 2;
  }

  void disable(std::size_t e) {
    edges_[e].cap = 0;
    edges_[e ^ 1].cap = 0;
  }

  std::size_t size() const { return adj_.size(); }
  std::vector<Edge>& edges() { return edges_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& out(std::size_t u) const { return adj_[u]; }

  std::vector<bool> reachable(std::size_t s) const {
    std::vector<bool> seen(size(), false);
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t e : adj_[u]) {
        const auto& edge = edges_[e];
        if (edge.cap > 0 && !seen[edge.to]) {
          seen[edge.to] = true;
          stack.push_back(edge.to);
        }
      }
    }
    return seen;
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest distances from s over residual arcs (queue-based Bellman-Ford).
// Unreachable nodes get potential 0; they stay unreachable for the phase.
inline std::vector<double> bellman_ford(const Residual& g, std::size_t s) {
  const std::size_t n = g.size();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> relaxations(n, 0);
  std::vector<bool> queued(n, false);
  std::queue<std::size_t> queue;
  dist[s] = 0.0;
  queue.push(s);
  queued[s] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop();
    queued[u] = false;
    for (std::size_t e : g.out(u)) {
      const auto& edge = g.edges()[e];
      if (edge.cap <= 0) continue;
      const double nd = dist[u] + edge.cost;
      if (nd < dist[edge.to] - kPotentialTolerance) {
        dist[edge.to] = nd;
        if (!queued[edge.to]) {
          if (++relaxations[edge.to] > n) throw DomainError("flow network contains a negative-cost cycle");
          queued[edge.to] = true;
          queue.push(edge.to);
        }
      }
    }
  }
  for (auto& d : dist) {
    if (d == kInf) d = 0.0;
  }
  return dist;
}

// Successive shortest augmenting paths from s to t, pushing at most `limit` units.
inline std::int64_t augment(Residual& g, std::size_t s, std::size_t t, std::int64_t limit) {
  const std::size_t n = g.size();
  std::vector<double> potential = bellman_ford(g, s);
  std::vector<double> dist(n);
  std::vector<std::size_t> via(n);
  std::int64_t pushed = 0;

  using Entry = std::pair<double, std::size_t>;
  while (pushed < limit) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(via.begin(), via.end(), std::numeric_limits<std::size_t>::max());
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[s] = 0.0;
    heap.push({0.0, s});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (std::size_t e : g.out(u)) {
        const auto& edge = g.edges()[e];
        if (edge.cap <= 0) continue;
        const double reduced = std::max(0.0, edge.cost + potential[u] - potential[edge.to]);
        const double nd = d + reduced;
        if (nd < dist[edge.to]) {
          dist[edge.to] = nd;
          via[edge.to] = e;
          heap.push({nd, edge.to});
        }
      }
    }
    if (dist[t] == kInf) break;

    double farthest = 0.0;
    for (double d : dist) {
      if (d != kInf) farthest = std::max(farthest, d);
    }
    for (std::size_t v = 0; v < n; ++v) potential[v] += dist[v] == kInf ? farthest : dist[v];

    std::int64_t bottleneck = limit - pushed;
    for (std::size_t v = t; v != s; v = g.edges()[via[v] ^ 1].to) {
      bottleneck = std::min(bottleneck, g.edges()[via[v]].cap);
    }
    for (std::size_t v = t; v != s; v = g.edges()[via[v] ^ 1].to) {
      g.edges()[via[v]].cap -= bottleneck;
      g.edges()[via[v] ^ 1].cap += bottleneck;
    }
    pushed += bottleneck;
  }

#if !defined(NDEBUG) || defined(KSVC_FLOW_CERTIFICATE)
  // Optimality certificate: no residual arc has negative reduced cost.
  const auto live = g.reachable(s);
  for (std::size_t u = 0; u < n; ++u) {
    if (!live[u]) continue;
    for (std::size_t e : g.out(u)) {
      const auto& edge = g.edges()[e];
      if (edge.cap > 0) {
        const double reduced = edge.cost + potential[u] - potential[edge.to];
        const double scale = 1.0 + std::abs(potential[u]) + std::abs(potential[edge.to]);
        if (reduced < -1e-9 * scale) throw std::logic_error("min_cost_flow: potentials certificate violated");
      }
    }
  }
#endif
  return pushed;
}

}  // namespace detail

/// Minimum-cost maximum flow honoring per-arc lower bounds.
///
/// Lower bounds are removed by the usual excess transformation and satisfied
/// first through an auxiliary source/sink pair (with a free sink-to-source
/// return arc); the remaining s-t flow is then maximized by successive
/// shortest paths. Both phases keep the residual graph free of negative
/// cycles, so the result is cheapest among all maximum flows.
inline FlowResult min_cost_flow(const FlowNetwork& net) {
  const std::size_t n = net.nodes();
  const std::size_t super_source = n;
  const std::size_t super_sink = n + 1;
  detail::Residual g(n + 2);

  std::vector<std::int64_t> excess(n, 0);
  std::vector<std::size_t> edge_of(net.arcs().size());
  for (std::size_t a = 0; a < net.arcs().size(); ++a) {
    const Arc& arc = net.arcs()[a];
    edge_of[a] = g.add(arc.from, arc.to, arc.capacity - arc.lower, arc.cost);
    excess[arc.to] += arc.lower;
    excess[arc.from] -= arc.lower;
  }
  const std::size_t return_arc = g.add(net.sink(), net.source(), kUnbounded, 0.0);

  std::int64_t required = 0;
  std::vector<std::size_t> aux;
  for (std::size_t v = 0; v < n; ++v) {
    if (excess[v] > 0) {
      aux.push_back(g.add(super_source, v, excess[v], 0.0));
      required += excess[v];
    } else if (excess[v] < 0) {
      aux.push_back(g.add(v, super_sink, -excess[v], 0.0));
    }
  }

  if (required > 0) {
    const std::int64_t routed = detail::augment(g, super_source, super_sink, required);
    if (routed < required) {
      const auto side = g.reachable(super_source);
      std::ostringstream msg;
      msg << "infeasible lower bounds: only " << routed << " of " << required
          << " required units can be routed; violated cut separates nodes {";
      bool first = true;
      for (std::size_t v = 0; v < n; ++v) {
        if (side[v]) {
          msg << (first ? "" : ",") << v;
          first = false;
        }
      }
      msg << "} from the rest";
      throw InfeasibleError(msg.str());
    }
  }
  g.disable(return_arc);
  for (std::size_t e : aux) g.disable(e);
  detail::augment(g, net.source(), net.sink(), kUnbounded);

  FlowResult result;
  result.flow.resize(net.arcs().size());
  for (std::size_t a = 0; a < net.arcs().size(); ++a) {
    const Arc& arc = net.arcs()[a];
    result.flow[a] = arc.lower + g.edges()[edge_of[a] ^ 1].cap;
    result.cost += static_cast<double>(result.flow[a]) * arc.cost;
    if (arc.from == net.source()) result.value += result.flow[a];
    if (arc.to == net.source()) result.value -= result.flow[a];
  }
  return result;
}

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, column), sorted by row
  double cost = 0.0;
};

/// Cheapest set of `size` disjoint (row, column) pairs in a dense cost matrix.
///
/// Dense successive-shortest-path on the bipartite graph with node potentials;
/// each augmentation is an O((a+b)^2 + ab) Dijkstra. Independent of
/// min_cost_flow so the two can cross-check each other.
inline Matching min_cost_matching(const std::vector<std::vector<double>>& costs, std::size_t size) {
  const std::size_t rows = costs.size();
  const std::size_t cols = rows == 0 ? 0 : costs.front().size();
  for (const auto& row : costs) {
    if (row.size() != cols) throw DomainError("min_cost_matching: ragged cost matrix");
    for (double c : row) {
      if (!std::isfinite(c)) throw DomainError("min_cost_matching: costs must be finite");
    }
  }
  if (size > std::min(rows, cols)) throw DomainError("min_cost_matching: size exceeds min(rows, cols)");

  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  constexpr double inf = detail::kInf;
  // Node layout: rows [0, rows), columns [rows, rows+cols), sink last. The source has potential 0.
  const std::size_t sink = rows + cols;
  const std::size_t n = sink + 1;
  std::vector<double> potential(n, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double best = inf;
    for (std::size_t i = 0; i < rows; ++i) best = std::min(best, costs[i][j]);
    potential[rows + j] = best;
  }
  if (cols > 0) {
    potential[sink] = *std::min_element(potential.begin() + static_cast<std::ptrdiff_t>(rows),
                                        potential.begin() + static_cast<std::ptrdiff_t>(sink));
  }

  std::vector<std::size_t> row_match(rows, none), col_match(cols, none);
  std::vector<double> dist(n);
  std::vector<std::size_t> parent(n);
  std::vector<bool> done(n);

  for (std::size_t step = 0; step < size; ++step) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), none);
    std::fill(done.begin(), done.end(), false);
    for (std::size_t i = 0; i < rows; ++i) {
      if (row_match[i] == none) dist[i] = std::max(0.0, -potential[i]);
    }
    for (;;) {
      std::size_t u = none;
      for (std::size_t v = 0; v < n; ++v) {
        if (!done[v] && dist[v] != inf && (u == none || dist[v] < dist[u])) u = v;
      }
      if (u == none) break;
      done[u] = true;
      auto relax = [&](std::size_t v, double arc_cost) {
        const double nd = dist[u] + std::max(0.0, arc_cost + potential[u] - potential[v]);
        if (nd < dist[v]) {
          dist[v] = nd;
          parent[v] = u;
        }
      };
      if (u < rows) {
        for (std::size_t j = 0; j < cols; ++j) {
          if (row_match[u] != j) relax(rows + j, costs[u][j]);
        }
      } else if (u < sink) {
        const std::size_t j = u - rows;
        if (col_match[j] == none) {
          relax(sink, 0.0);
        } else {
          relax(col_match[j], -costs[col_match[j]][j]);
        }
      }
    }
    if (dist[sink] == inf) throw std::logic_error("min_cost_matching: no augmenting path");

    double farthest = 0.0;
    for (double d : dist) {
      if (d != inf) farthest = std::max(farthest, d);
    }
    for (std::size_t v = 0; v < n; ++v) potential[v] += dist[v] == inf ? farthest : dist[v];

    // Walk back sink <- col <- row <- col <- ... <- free row, flipping matches.
    std::size_t col_node = parent[sink];
    while (col_node != none) {
      const std::size_t row = parent[col_node];
      const std::size_t previous_col = row_match[row];
      row_match[row] = col_node - rows;
      col_match[col_node - rows] = row;
      col_node = parent[row];
      if (col_node != none && col_node != previous_col + rows) {
        throw std::logic_error("min_cost_matching: inconsistent augmenting path");
      }
    }
  }

  Matching result;
  for (std::size_t i = 0; i < rows; ++i) {
    if (row_match[i] != none) {
      result.pairs.emplace_back(i, row_match[i]);
      result.cost += costs[i][row_match[i]];
    }
  }
  return result;
}

}  // namespace ksvc::flow
