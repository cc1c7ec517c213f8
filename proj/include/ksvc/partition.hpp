#pragma once

// Partition algorithms: for fixed centers, the cheapest clustering that meets
// a size constraint (lower bounds, capacities) or drops m outliers.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ksvc/combinatorics.hpp"
#include "ksvc/errors.hpp"
#include "ksvc/flow.hpp"
#include "ksvc/metric.hpp"

namespace ksvc {

enum class ConstraintKind { unconstrained, r_gather, r_capacity, outlier };

inline const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::unconstrained: return "unconstrained";
    case ConstraintKind::r_gather: return "r_gather";
    case ConstraintKind::r_capacity: return "r_capacity";
    case ConstraintKind::outlier: return "outlier";
  }
  return "?";
}

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::unconstrained;
  /// Per-cluster lower bounds (r_gather) or capacities (r_capacity). With
  /// `uniform` set, a single value applies to every cluster.
  std::vector<std::size_t> bounds;
  bool uniform = false;
  std::size_t outliers = 0;

  static ConstraintSpec unconstrained() { return {}; }
  static ConstraintSpec r_gather(std::vector<std::size_t> r) { return {ConstraintKind::r_gather, std::move(r), false, 0}; }
  static ConstraintSpec r_gather_uniform(std::size_t r) { return {ConstraintKind::r_gather, {r}, true, 0}; }
  static ConstraintSpec r_capacity(std::vector<std::size_t> r) {
    return {ConstraintKind::r_capacity, std::move(r), false, 0};
  }
  static ConstraintSpec r_capacity_uniform(std::size_t r) { return {ConstraintKind::r_capacity, {r}, true, 0}; }
  static ConstraintSpec outlier(std::size_t m) { return {ConstraintKind::outlier, {}, false, m}; }

  bool has_bounds() const { return kind == ConstraintKind::r_gather || kind == ConstraintKind::r_capacity; }

  std::size_t excluded_count() const { return kind == ConstraintKind::outlier ? outliers : 0; }

  /// The k per-cluster values.
  std::vector<std::size_t> bounds_for(std::size_t k) const {
    if (!has_bounds()) return {};
    if (uniform) {
      if (bounds.size() != 1) throw DomainError("constraint: a uniform bound needs exactly one value");
      return std::vector<std::size_t>(k, bounds.front());
    }
    if (bounds.size() != k) {
      throw DomainError(std::string("constraint: ") + to_string(kind) + " has " + std::to_string(bounds.size()) +
                        " bounds but k=" + std::to_string(k));
    }
    return bounds;
  }

  /// Relabeling clusters maps feasible clusterings to feasible clusterings.
  bool symmetric(std::size_t k) const {
    if (!has_bounds()) return true;
    const auto r = bounds_for(k);
    return std::adjacent_find(r.begin(), r.end(), std::not_equal_to<>()) == r.end();
  }

  void check_feasible(std::size_t n, std::size_t k) const {
    if (k == 0) throw DomainError("constraint: k must be positive");
    const auto r = bounds_for(k);
    const std::size_t sum = std::accumulate(r.begin(), r.end(), std::size_t{0});
    switch (kind) {
      case ConstraintKind::unconstrained: return;
      case ConstraintKind::r_gather:
        if (sum > n) {
          throw InfeasibleError("r_gather: lower bounds sum to " + std::to_string(sum) + " > |C|=" + std::to_string(n));
        }
        return;
      case ConstraintKind::r_capacity:
        if (sum < n) {
          throw InfeasibleError("r_capacity: capacities sum to " + std::to_string(sum) + " < |C|=" +
                                std::to_string(n));
        }
        return;
      case ConstraintKind::outlier:
        if (outliers >= n) {
          throw InfeasibleError("outlier: m=" + std::to_string(outliers) + " must be < |C|=" + std::to_string(n));
        }
        return;
    }
  }

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

struct PartitionResult {
  Clustering clustering;
  double cost = 0.0;  // cluster i served by center i
  /// For size constraints: the bound given to each center in the optimum.
  std::vector<std::size_t> demand_assignment;
};

/// Whether a clustering meets the constraint under some cluster relabeling
/// (sizes compared against the bound multiset).
inline bool satisfies(const ConstraintSpec& spec, const Clustering& clustering) {
  const std::size_t k = clustering.k();
  const std::size_t excluded = clustering.excluded_clients().size();
  if (excluded != spec.excluded_count()) return false;
  if (!spec.has_bounds()) return true;
  auto sizes = clustering.sizes();
  auto r = spec.bounds_for(k);
  std::sort(sizes.rbegin(), sizes.rend());
  std::sort(r.rbegin(), r.rend());
  for (std::size_t i = 0; i < k; ++i) {
    if (spec.kind == ConstraintKind::r_gather && sizes[i] < r[i]) return false;
    if (spec.kind == ConstraintKind::r_capacity && sizes[i] > r[i]) return false;
  }
  return true;
}

namespace detail {

struct BoundedAssignment {
  std::vector<std::vector<std::int64_t>> counts;  // counts[i][v]: units of group v sent to center i
  double cost = 0.0;
};

// Send every unit of every group to some center so that center i receives
// between lower[i] and upper[i] units, at minimum total cost. cost[i][v] is
// the per-unit price of sending group v to center i. Groups with
// multiplicity 1 are single clients; larger groups come from compressed streams.
inline BoundedAssignment assign_with_bounds(const std::vector<std::vector<double>>& cost,
                                            const std::vector<std::int64_t>& multiplicity,
                                            const std::vector<std::int64_t>& lower,
                                            const std::vector<std::int64_t>& upper) {
  const std::size_t k = lower.size();
  const std::size_t groups = multiplicity.size();
  flow::FlowNetwork net(2 + k + groups, 0, 1);
  std::vector<std::vector<std::size_t>> arc(k, std::vector<std::size_t>(groups));
  for (std::size_t i = 0; i < k; ++i) net.add_arc(0, 2 + i, lower[i], upper[i], 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t v = 0; v < groups; ++v) arc[i][v] = net.add_arc(2 + i, 2 + k + v, 0, multiplicity[v], cost[i][v]);
  }
  for (std::size_t v = 0; v < groups; ++v) net.add_arc(2 + k + v, 1, multiplicity[v], multiplicity[v], 0.0);

  const auto result = flow::min_cost_flow(net);
  BoundedAssignment out;
  out.counts.assign(k, std::vector<std::int64_t>(groups, 0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t v = 0; v < groups; ++v) out.counts[i][v] = result.flow[arc[i][v]];
  }
  out.cost = result.cost;
  return out;
}

// Runs `solve(per_center_bounds)` for every distinct assignment of the bound
// multiset to centers and keeps the first strict minimum.
template <class Solve>
auto best_over_demands(const std::vector<std::size_t>& bounds, Solve&& solve) {
  using Result = decltype(solve(bounds));
  std::optional<Result> best;
  std::vector<std::size_t> best_bounds;
  for (const auto& perm : distinct_permutations(bounds)) {
    Result candidate = solve(perm);
    if (!best || candidate.cost < best->cost) {
      best = std::move(candidate);
      best_bounds = perm;
    }
  }
  return std::make_pair(std::move(*best), best_bounds);
}

inline PartitionResult size_constrained(const MetricInstance& instance, const CenterSet& centers,
                                        const std::vector<std::size_t>& bounds, bool lower_bounds) {
  const std::size_t k = centers.size();
  const std::size_t n = instance.num_clients();
  std::vector<std::vector<double>> cost(k, std::vector<double>(n));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t x = 0; x < n; ++x) cost[i][x] = instance.client_cost(x, centers[i]);
  }
  const std::vector<std::int64_t> ones(n, 1);
  auto solve = [&](const std::vector<std::size_t>& r) {
    std::vector<std::int64_t> lower(k), upper(k);
    for (std::size_t i = 0; i < k; ++i) {
      lower[i] = lower_bounds ? static_cast<std::int64_t>(r[i]) : 0;
      upper[i] = lower_bounds ? static_cast<std::int64_t>(n) : static_cast<std::int64_t>(r[i]);
    }
    return assign_with_bounds(cost, ones, lower, upper);
  };
  auto [best, demand] = best_over_demands(bounds, solve);

  std::vector<std::size_t> labels(n, Clustering::excluded);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t x = 0; x < n; ++x) {
      if (best.counts[i][x] > 0) labels[x] = i;
    }
  }
  PartitionResult out{Clustering(k, std::move(labels)), 0.0, std::move(demand)};
  for (std::size_t x = 0; x < n; ++x) out.cost += cost[out.clustering.label(x)][x];
  return out;
}

}  // namespace detail

/// Cheapest clustering where center i receives at least r_i clients, over all
/// assignments of the r values to centers.
inline PartitionResult partition_r_gather(const MetricInstance& instance, const CenterSet& centers,
                                          const std::vector<std::size_t>& r) {
  check_centers(instance, centers);
  ConstraintSpec spec = ConstraintSpec::r_gather(r);
  spec.check_feasible(instance.num_clients(), centers.size());
  return detail::size_constrained(instance, centers, spec.bounds_for(centers.size()), true);
}

/// Cheapest clustering where center i receives at most r_i clients.
inline PartitionResult partition_r_capacity(const MetricInstance& instance, const CenterSet& centers,
                                            const std::vector<std::size_t>& r) {
  check_centers(instance, centers);
  ConstraintSpec spec = ConstraintSpec::r_capacity(r);
  spec.check_feasible(instance.num_clients(), centers.size());
  return detail::size_constrained(instance, centers, spec.bounds_for(centers.size()), false);
}

/// The m clients farthest from the centers, as a skip mask. Equal distances
/// drop the larger client index first.
inline std::vector<bool> farthest_clients(const MetricInstance& instance, const CenterSet& centers, std::size_t m) {
  const std::size_t n = instance.num_clients();
  const auto points = center_points(instance, centers);
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t x = 0; x < n; ++x) order[x] = {nearest_cost(instance, points, x), x};
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  std::vector<bool> skip(n, false);
  for (std::size_t i = 0; i < m; ++i) skip[order[i].second] = true;
  return skip;
}

/// Drop the m farthest clients, Voronoi on the rest.
inline PartitionResult partition_outlier(const MetricInstance& instance, const CenterSet& centers, std::size_t m) {
  check_centers(instance, centers);
  ConstraintSpec::outlier(m).check_feasible(instance.num_clients(), centers.size());
  const auto skip = farthest_clients(instance, centers, m);
  PartitionResult out{voronoi_partition(instance, centers, skip), 0.0, {}};
  for (std::size_t x = 0; x < instance.num_clients(); ++x) {
    if (!out.clustering.is_excluded(x)) out.cost += instance.client_cost(x, centers[out.clustering.label(x)]);
  }
  return out;
}

inline PartitionResult partition(const MetricInstance& instance, const CenterSet& centers,
                                 const ConstraintSpec& spec) {
  check_centers(instance, centers);
  spec.check_feasible(instance.num_clients(), centers.size());
  switch (spec.kind) {
    case ConstraintKind::unconstrained: return partition_outlier(instance, centers, 0);
    case ConstraintKind::r_gather:
      return detail::size_constrained(instance, centers, spec.bounds_for(centers.size()), true);
    case ConstraintKind::r_capacity:
      return detail::size_constrained(instance, centers, spec.bounds_for(centers.size()), false);
    case ConstraintKind::outlier: return partition_outlier(instance, centers, spec.outliers);
  }
  throw DomainError("partition: unknown constraint kind");
}

}  // namespace ksvc
