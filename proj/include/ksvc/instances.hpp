#pragma once

// Instance generators: uniform random instances and the gadget graph on which
// nearest-facility candidate pools miss every optimal facility.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "ksvc/errors.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/rng.hpp"

namespace ksvc {

struct BadInstanceParams {
  std::size_t k = 2;
  std::size_t cluster_size = 3;  // clients per gadget
  double delta = 0.1;
  double big_delta = 0.0;  // inter-gadget edge weight; 0 selects 10 * |C|
  double ell = 1.0;

  double resolved_big_delta() const { return big_delta > 0.0 ? big_delta : 10.0 * static_cast<double>(k * cluster_size); }
};

struct BadInstanceBundle {
  MetricInstance instance;
  Clustering target_clustering;           // client x belongs to gadget x / s
  CenterSet optimal_centers;              // the hub facility of each gadget, in gadget order
  std::vector<std::vector<std::size_t>> decoys;  // decoys[x]: the k private facilities of client x
  BadInstanceParams params;
};

/// Gadget i holds s clients, each joined to the hub f_i with a unit edge and
/// to k private decoy facilities with edges of weight 1 - delta; hubs of
/// different gadgets are joined by edges of weight big_delta.
///
/// Point layout: clients 0..ks-1 (gadget-major), then per gadget the hub
/// followed by the decoys of its clients (client-major). Facility positions in
/// L follow the same order.
inline BadInstanceBundle gen_bad_instance(const BadInstanceParams& params) {
  const std::size_t k = params.k;
  const std::size_t s = params.cluster_size;
  if (k == 0) throw DomainError("bad instance: k must be >= 1");
  if (s == 0) throw DomainError("bad instance: cluster size must be >= 1");
  if (!(params.delta > 0.0 && params.delta < 1.0)) throw DomainError("bad instance: delta must lie in (0, 1)");
  const double big = params.resolved_big_delta();
  if (!(big > static_cast<double>(k * s))) throw DomainError("bad instance: big_delta must exceed |C| = k*s");

  const std::size_t n_clients = k * s;
  const std::size_t per_gadget = 1 + s * k;
  const std::size_t n_points = n_clients + k * per_gadget;
  std::vector<WeightedEdge> edges;
  std::vector<std::size_t> clients(n_clients), facilities;
  std::vector<std::size_t> hubs(k);
  std::vector<std::vector<std::size_t>> decoys(n_clients);

  for (std::size_t x = 0; x < n_clients; ++x) clients[x] = x;
  for (std::size_t g = 0; g < k; ++g) {
    const std::size_t hub_point = n_clients + g * per_gadget;
    hubs[g] = facilities.size();
    facilities.push_back(hub_point);
    for (std::size_t c = 0; c < s; ++c) {
      const std::size_t x = g * s + c;
      edges.push_back({x, hub_point, 1.0});
      for (std::size_t d = 0; d < k; ++d) {
        const std::size_t decoy_point = hub_point + 1 + c * k + d;
        decoys[x].push_back(facilities.size());
        facilities.push_back(decoy_point);
        edges.push_back({x, decoy_point, 1.0 - params.delta});
      }
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) edges.push_back({n_clients + a * per_gadget, n_clients + b * per_gadget, big});
  }

  auto metric = std::make_shared<const Metric>(Metric::from_graph(n_points, std::move(edges)));
  std::vector<std::size_t> labels(n_clients);
  for (std::size_t x = 0; x < n_clients; ++x) labels[x] = x / s;
  return {MetricInstance(metric, std::move(clients), std::move(facilities), params.ell),
          Clustering(k, std::move(labels)), CenterSet(std::move(hubs)), std::move(decoys), params};
}

struct RandomParams {
  std::size_t n_clients = 8;
  std::size_t n_facilities = 6;
  MetricMode mode = MetricMode::euclidean;
  double spread = 100.0;
  std::size_t dim = 2;
  double ell = 1.0;
  bool clients_in_facilities = false;  // L = C plus n_facilities extra points
};

/// Points uniform in [0, spread]^dim. Matrix mode stores the Euclidean
/// distances of that embedding, which is a metric by construction.
inline MetricInstance gen_random(const RandomParams& params, Rng& rng) {
  if (params.n_clients == 0) throw DomainError("random instance: empty instance (no clients)");
  if (params.n_facilities == 0 && !params.clients_in_facilities) {
    throw DomainError("random instance: no facilities");
  }
  if (params.dim == 0) throw DomainError("random instance: dim must be >= 1");
  if (params.mode == MetricMode::graph) throw DomainError("random instance: graph mode is not generated");
  const std::size_t n = params.n_clients + params.n_facilities;
  std::vector<std::vector<double>> coords(n, std::vector<double>(params.dim));
  for (auto& p : coords) {
    for (auto& c : p) c = rng.uniform01() * params.spread;
  }
  std::vector<std::size_t> clients(params.n_clients), facilities;
  for (std::size_t i = 0; i < params.n_clients; ++i) clients[i] = i;
  if (params.clients_in_facilities) facilities = clients;
  for (std::size_t j = 0; j < params.n_facilities; ++j) facilities.push_back(params.n_clients + j);

  std::shared_ptr<const Metric> metric;
  if (params.mode == MetricMode::euclidean) {
    metric = std::make_shared<const Metric>(Metric::from_coords(std::move(coords)));
  } else {
    const Metric euclid = Metric::from_coords(coords);
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) rows[a][b] = euclid(a, b);
    }
    metric = std::make_shared<const Metric>(Metric::from_matrix(std::move(rows)));
  }
  return MetricInstance(metric, std::move(clients), std::move(facilities), params.ell);
}

}  // namespace ksvc
