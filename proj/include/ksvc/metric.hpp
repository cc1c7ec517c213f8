#pragma once

// Metric instances, the service costs Phi / Psi / Psi*, Voronoi assignment and
// recovery of optimal centers for a fixed clustering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ksvc/errors.hpp"
#include "ksvc/flow.hpp"

namespace ksvc {

inline constexpr double kRelTol = 1e-9;
inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// a <= b up to relative tolerance kRelTol.
inline bool approx_le(double a, double b, double rel = kRelTol) {
  return a <= b + rel * std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool approx_eq(double a, double b, double rel = kRelTol) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// d^ell with exact fast paths for k-median and k-means.
inline double pow_ell(double d, double ell) {
  if (ell == 1.0) return d;
  if (ell == 2.0) return d * d;
  return std::pow(d, ell);
}

enum class MetricMode { matrix, euclidean, graph };

inline const char* to_string(MetricMode mode) {
  switch (mode) {
    case MetricMode::matrix: return "matrix";
    case MetricMode::euclidean: return "euclidean";
    case MetricMode::graph: return "graph";
  }
  return "?";
}

struct WeightedEdge {
  std::size_t u;
  std::size_t v;
  double weight;
};

/// Default size limit for the O(n^3) triangle check on explicit matrices.
inline constexpr std::size_t kValidateLimit = 512;

/// Throws DomainError describing the first violated metric axiom.
inline void validate_metric_matrix(const std::vector<double>& dense, std::size_t n, double rel = kRelTol) {
  auto at = [&](std::size_t i, std::size_t j) { return dense[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    if (at(i, i) != 0.0) {
      throw DomainError("metric: d(" + std::to_string(i) + "," + std::to_string(i) + ") must be 0");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(at(i, j)) || at(i, j) < 0.0) {
        throw DomainError("metric: d(" + std::to_string(i) + "," + std::to_string(j) +
                          ") must be finite and nonnegative");
      }
      if (at(i, j) != at(j, i)) {
        throw DomainError("metric: matrix is not symmetric at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      }
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t z = 0; z < n; ++z) {
        if (!approx_le(at(x, z), at(x, y) + at(y, z), rel)) {
          std::ostringstream msg;
          msg << "metric: triangle inequality fails for (" << x << "," << y << "," << z << "): d(" << x
              << "," << z << ")=" << at(x, z) << " > " << at(x, y) + at(y, z);
          throw DomainError(msg.str());
        }
      }
    }
  }
}

/// Distance oracle over the point universe {0, ..., size()-1}.
///
/// Matrix and graph metrics are stored densely (graph distances are all-pairs
/// shortest paths computed at construction); Euclidean distances are computed
/// on demand from coordinates so large client sets stay cheap.
class Metric {
 public:
  static Metric from_matrix(std::vector<std::vector<double>> rows, bool validate = true) {
    Metric m(MetricMode::matrix, rows.size());
    m.dense_.reserve(m.n_ * m.n_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.n_) {
        throw DomainError("metric: matrix row " + std::to_string(i) + " has length " +
                          std::to_string(rows[i].size()) + ", expected " + std::to_string(m.n_));
      }
      m.dense_.insert(m.dense_.end(), rows[i].begin(), rows[i].end());
    }
    if (validate && m.n_ <= kValidateLimit) validate_metric_matrix(m.dense_, m.n_);
    return m;
  }

  static Metric from_coords(std::vector<std::vector<double>> coords) {
    Metric m(MetricMode::euclidean, coords.size());
    const std::size_t dim = coords.empty() ? 0 : coords.front().size();
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i].size() != dim) {
        throw DomainError("metric: point " + std::to_string(i) + " has dimension " +
                          std::to_string(coords[i].size()) + ", expected " + std::to_string(dim));
      }
      for (double c : coords[i]) {
        if (!std::isfinite(c)) throw DomainError("metric: non-finite coordinate at point " + std::to_string(i));
      }
    }
    m.coords_ = std::move(coords);
    return m;
  }

  /// Shortest-path metric of an undirected weighted graph on n nodes (Dijkstra from every node).
  static Metric from_graph(std::size_t n, std::vector<WeightedEdge> edges) {
    Metric m(MetricMode::graph, n);
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (const auto& e : edges) {
      if (e.u >= n || e.v >= n) throw DomainError("metric: graph edge endpoint out of range");
      if (!std::isfinite(e.weight) || e.weight < 0.0) throw DomainError("metric: graph edge weights must be >= 0");
      adj[e.u].emplace_back(e.v, e.weight);
      adj[e.v].emplace_back(e.u, e.weight);
    }
    m.dense_.assign(n * n, std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, std::size_t>;
    for (std::size_t s = 0; s < n; ++s) {
      double* dist = &m.dense_[s * n];
      std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
      dist[s] = 0.0;
      heap.push({0.0, s});
      while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, w] : adj[u]) {
          if (d + w < dist[v]) {
            dist[v] = d + w;
            heap.push({dist[v], v});
          }
        }
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (!std::isfinite(dist[v])) {
          throw DomainError("metric: graph is disconnected (no path " + std::to_string(s) + " -> " +
                            std::to_string(v) + ")");
        }
      }
    }
    // Symmetrize exactly; Dijkstra sums can differ in the last bit between directions.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = std::min(m.dense_[i * n + j], m.dense_[j * n + i]);
        m.dense_[i * n + j] = m.dense_[j * n + i] = d;
      }
    }
    m.edges_ = std::move(edges);
    return m;
  }

  MetricMode mode() const { return mode_; }
  std::size_t size() const { return n_; }

  double operator()(std::size_t a, std::size_t b) const {
    if (mode_ != MetricMode::euclidean) return dense_[a * n_ + b];
    const auto& p = coords_[a];
    const auto& q = coords_[b];
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double diff = p[i] - q[i];
      sum += diff * diff;
    }
    return std::sqrt(sum);
  }

  /// Row of distances from `a` to every point (dense modes read it directly).
  std::vector<double> row(std::size_t a) const {
    std::vector<double> out(n_);
    for (std::size_t b = 0; b < n_; ++b) out[b] = (*this)(a, b);
    return out;
  }

  const std::vector<std::vector<double>>& coords() const { return coords_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

 private:
  Metric(MetricMode mode, std::size_t n) : mode_(mode), n_(n) {}

  MetricMode mode_;
  std::size_t n_;
  std::vector<double> dense_;
  std::vector<std::vector<double>> coords_;
  std::vector<WeightedEdge> edges_;
};

/// A k-service instance (C, L, d, ell). Clients and facilities are ordered
/// lists of point ids; a client is addressed by its position in C and a
/// facility by its position in L. The two lists may share points.
class MetricInstance {
 public:
  MetricInstance(std::shared_ptr<const Metric> metric, std::vector<std::size_t> clients,
                 std::vector<std::size_t> facilities, double ell)
      : metric_(std::move(metric)), clients_(std::move(clients)), facilities_(std::move(facilities)), ell_(ell) {
    if (!metric_) throw DomainError("instance: missing metric");
    if (clients_.empty()) throw DomainError("instance: empty client set");
    if (facilities_.empty()) throw DomainError("instance: empty facility set");
    if (!(ell_ >= 1.0) || !std::isfinite(ell_)) throw DomainError("instance: ell must be a real >= 1");
    check_ids(clients_, "client");
    check_ids(facilities_, "facility");
  }

  const Metric& metric() const { return *metric_; }
  std::shared_ptr<const Metric> shared_metric() const { return metric_; }
  double ell() const { return ell_; }

  std::size_t num_clients() const { return clients_.size(); }
  std::size_t num_facilities() const { return facilities_.size(); }
  const std::vector<std::size_t>& clients() const { return clients_; }
  const std::vector<std::size_t>& facilities() const { return facilities_; }
  std::size_t client_point(std::size_t i) const { return clients_[i]; }
  std::size_t facility_point(std::size_t j) const { return facilities_[j]; }

  double distance(std::size_t point_a, std::size_t point_b) const { return (*metric_)(point_a, point_b); }
  /// d(a, b)^ell between two points.
  double cost(std::size_t point_a, std::size_t point_b) const { return pow_ell(distance(point_a, point_b), ell_); }
  double client_cost(std::size_t client, std::size_t facility) const {
    return cost(clients_[client], facilities_[facility]);
  }

  /// Same metric and clients with a different facility list.
  MetricInstance with_facilities(std::vector<std::size_t> facilities) const {
    return MetricInstance(metric_, clients_, std::move(facilities), ell_);
  }

  /// The instance (C, C): every client is an admissible center.
  MetricInstance clients_as_facilities() const { return with_facilities(clients_); }

  bool clients_within_facilities() const {
    std::vector<std::size_t> sorted = facilities_;
    std::sort(sorted.begin(), sorted.end());
    return std::all_of(clients_.begin(), clients_.end(),
                       [&](std::size_t c) { return std::binary_search(sorted.begin(), sorted.end(), c); });
  }

 private:
  void check_ids(const std::vector<std::size_t>& ids, const char* what) const {
    std::vector<std::size_t> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DomainError(std::string("instance: duplicate ") + what + " point id");
    }
    if (!sorted.empty() && sorted.back() >= metric_->size()) {
      throw DomainError(std::string("instance: ") + what + " point id " + std::to_string(sorted.back()) +
                        " outside the metric (size " + std::to_string(metric_->size()) + ")");
    }
  }

  std::shared_ptr<const Metric> metric_;
  std::vector<std::size_t> clients_;
  std::vector<std::size_t> facilities_;
  double ell_;
};

/// k distinct facility indices (positions in L). Position i is center i.
class CenterSet {
 public:
  CenterSet() = default;
  explicit CenterSet(std::vector<std::size_t> facilities) : facilities_(std::move(facilities)) {
    std::vector<std::size_t> sorted = facilities_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DomainError("center set: facilities must be distinct");
    }
  }

  std::size_t size() const { return facilities_.size(); }
  bool empty() const { return facilities_.empty(); }
  std::size_t operator[](std::size_t i) const { return facilities_[i]; }
  const std::vector<std::size_t>& facilities() const { return facilities_; }
  auto begin() const { return facilities_.begin(); }
  auto end() const { return facilities_.end(); }

  bool contains(std::size_t facility) const {
    return std::find(facilities_.begin(), facilities_.end(), facility) != facilities_.end();
  }

  friend bool operator==(const CenterSet&, const CenterSet&) = default;

 private:
  std::vector<std::size_t> facilities_;
};

inline void check_centers(const MetricInstance& instance, const CenterSet& centers) {
  if (centers.empty()) throw DomainError("center set is empty");
  for (std::size_t f : centers) {
    if (f >= instance.num_facilities()) {
      throw DomainError("center set: facility index " + std::to_string(f) + " out of range");
    }
  }
}

/// Assignment of clients to cluster labels 0..k-1; excluded clients (outliers) carry kNone.
class Clustering {
 public:
  static constexpr std::size_t excluded = kNone;

  Clustering(std::size_t k, std::vector<std::size_t> labels) : k_(k), labels_(std::move(labels)) {
    for (std::size_t label : labels_) {
      if (label != excluded && label >= k_) throw DomainError("clustering: label out of range");
    }
  }

  std::size_t k() const { return k_; }
  std::size_t num_clients() const { return labels_.size(); }
  std::size_t label(std::size_t client) const { return labels_[client]; }
  const std::vector<std::size_t>& labels() const { return labels_; }
  bool is_excluded(std::size_t client) const { return labels_[client] == excluded; }

  std::vector<std::size_t> excluded_clients() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == excluded) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> members(std::size_t cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == cluster) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out(k_, 0);
    for (std::size_t label : labels_) {
      if (label != excluded) ++out[label];
    }
    return out;
  }

  friend bool operator==(const Clustering&, const Clustering&) = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> labels_;
};

struct CostReport {
  double total = 0.0;
  std::vector<double> per_cluster;
  /// matching[j] = position in the center set serving cluster j.
  std::vector<std::size_t> matching;
};

/// min over centers of d(center, client)^ell, centers given as point ids.
inline double nearest_cost(const MetricInstance& instance, std::span<const std::size_t> center_points,
                           std::size_t client) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t p = instance.client_point(client);
  for (std::size_t c : center_points) best = std::min(best, instance.cost(c, p));
  return best;
}

/// Phi(F, S) with F given as point ids and S as client indices.
inline double phi_points(const MetricInstance& instance, std::span<const std::size_t> center_points,
                         std::span<const std::size_t> subset) {
  if (center_points.empty()) throw DomainError("phi: empty center set");
  double total = 0.0;
  for (std::size_t x : subset) {
    if (x >= instance.num_clients()) throw DomainError("phi: client index out of range");
    total += nearest_cost(instance, center_points, x);
  }
  return total;
}

inline std::vector<std::size_t> center_points(const MetricInstance& instance, const CenterSet& centers) {
  std::vector<std::size_t> points;
  points.reserve(centers.size());
  for (std::size_t f : centers) points.push_back(instance.facility_point(f));
  return points;
}

inline std::vector<std::size_t> all_clients(const MetricInstance& instance) {
  std::vector<std::size_t> out(instance.num_clients());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

inline double phi(const MetricInstance& instance, const CenterSet& centers, std::span<const std::size_t> subset) {
  check_centers(instance, centers);
  const auto points = center_points(instance, centers);
  return phi_points(instance, points, subset);
}

inline double phi(const MetricInstance& instance, const CenterSet& centers) {
  return phi(instance, centers, all_clients(instance));
}

/// Position (within `centers`) of the nearest center to a client; ties go to the smaller position.
inline std::size_t nearest_center(const MetricInstance& instance, const CenterSet& centers, std::size_t client) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const std::size_t p = instance.client_point(client);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double d = instance.distance(instance.facility_point(centers[i]), p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

/// Nearest-center assignment. Clients flagged in `skip` are excluded.
inline Clustering voronoi_partition(const MetricInstance& instance, const CenterSet& centers,
                                    const std::vector<bool>& skip = {}) {
  check_centers(instance, centers);
  std::vector<std::size_t> labels(instance.num_clients());
  for (std::size_t x = 0; x < labels.size(); ++x) {
    labels[x] = (!skip.empty() && skip[x]) ? Clustering::excluded : nearest_center(instance, centers, x);
  }
  return Clustering(centers.size(), std::move(labels));
}

namespace detail {

// w[i][j] = sum over clients of cluster j of d(x, facility_i)^ell, for the given facility list.
inline std::vector<std::vector<double>> cluster_costs(const MetricInstance& instance,
                                                      std::span<const std::size_t> facilities,
                                                      const Clustering& clustering) {
  std::vector<std::vector<double>> w(facilities.size(), std::vector<double>(clustering.k(), 0.0));
  for (std::size_t x = 0; x < clustering.num_clients(); ++x) {
    const std::size_t j = clustering.label(x);
    if (j == Clustering::excluded) continue;
    for (std::size_t i = 0; i < facilities.size(); ++i) w[i][j] += instance.client_cost(x, facilities[i]);
  }
  return w;
}

inline void check_clustering(const MetricInstance& instance, const Clustering& clustering, bool allow_empty,
                             const char* who) {
  if (clustering.num_clients() != instance.num_clients()) {
    throw DomainError(std::string(who) + ": clustering covers " + std::to_string(clustering.num_clients()) +
                      " clients, instance has " + std::to_string(instance.num_clients()));
  }
  if (!allow_empty) {
    const auto sizes = clustering.sizes();
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      if (sizes[j] == 0) {
        throw DomainError(std::string(who) + ": cluster " + std::to_string(j) + " is empty");
      }
    }
  }
}

}  // namespace detail

/// Psi(F, C): cheapest one-to-one correspondence between clusters and centers.
inline CostReport psi(const MetricInstance& instance, const CenterSet& centers, const Clustering& clustering,
                      bool allow_empty = false) {
  check_centers(instance, centers);
  if (centers.size() != clustering.k()) {
    throw DomainError("psi: clustering has " + std::to_string(clustering.k()) + " clusters but " +
                      std::to_string(centers.size()) + " centers were given");
  }
  detail::check_clustering(instance, clustering, allow_empty, "psi");
  const auto w = detail::cluster_costs(instance, centers.facilities(), clustering);
  const auto matching = flow::min_cost_matching(w, centers.size());

  CostReport report;
  report.per_cluster.assign(clustering.k(), 0.0);
  report.matching.assign(clustering.k(), kNone);
  for (const auto& [center, cluster] : matching.pairs) {
    report.matching[cluster] = center;
    report.per_cluster[cluster] = w[center][cluster];
  }
  for (double c : report.per_cluster) report.total += c;
  return report;
}

struct CenterRecovery {
  CenterSet centers;  // centers[j] serves cluster j
  CostReport report;  // identity matching; report.total = Psi*(C)
};

/// Psi*(C): match the k clusters to k distinct facilities of L at minimum cost.
/// Empty clusters are rejected unless allow_empty is set, in which case they
/// take any unused facility at zero cost.
inline CenterRecovery mcpm_centers(const MetricInstance& instance, const Clustering& clustering,
                                   bool allow_empty = false) {
  const std::size_t k = clustering.k();
  if (k == 0) throw DomainError("mcpm_centers: clustering has no clusters");
  if (k > instance.num_facilities()) {
    throw InfeasibleError("mcpm_centers: k=" + std::to_string(k) + " exceeds |L|=" +
                          std::to_string(instance.num_facilities()));
  }
  detail::check_clustering(instance, clustering, allow_empty, "mcpm_centers");
  std::vector<std::size_t> all(instance.num_facilities());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto w = detail::cluster_costs(instance, all, clustering);
  const auto matching = flow::min_cost_matching(w, k);

  std::vector<std::size_t> chosen(k, kNone);
  CostReport report;
  report.per_cluster.assign(k, 0.0);
  for (const auto& [facility, cluster] : matching.pairs) {
    chosen[cluster] = facility;
    report.per_cluster[cluster] = w[facility][cluster];
  }
  report.matching.resize(k);
  std::iota(report.matching.begin(), report.matching.end(), std::size_t{0});
  for (double c : report.per_cluster) report.total += c;
  return {CenterSet(std::move(chosen)), std::move(report)};
}

}  // namespace ksvc
