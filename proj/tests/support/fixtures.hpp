#pragma once

// Small instance builders shared by the test suites.

#include <cstddef>
#include <memory>
#include <vector>

#include "ksvc/instances.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/rng.hpp"

namespace fx {

/// Points on a line; clients and facilities given as point ids.
inline ksvc::MetricInstance line(const std::vector<double>& xs, std::vector<std::size_t> clients,
                                 std::vector<std::size_t> facilities, double ell = 1.0) {
  std::vector<std::vector<double>> coords;
  for (double x : xs) coords.push_back({x});
  auto metric = std::make_shared<const ksvc::Metric>(ksvc::Metric::from_coords(std::move(coords)));
  return ksvc::MetricInstance(metric, std::move(clients), std::move(facilities), ell);
}

inline ksvc::MetricInstance matrix(std::vector<std::vector<double>> rows, std::vector<std::size_t> clients,
                                   std::vector<std::size_t> facilities, double ell = 1.0) {
  auto metric = std::make_shared<const ksvc::Metric>(ksvc::Metric::from_matrix(std::move(rows)));
  return ksvc::MetricInstance(metric, std::move(clients), std::move(facilities), ell);
}

/// Random Euclidean instance with the given sizes.
inline ksvc::MetricInstance random(std::size_t n, std::size_t m, double ell, std::uint64_t seed,
                                   bool clients_in_facilities = false) {
  ksvc::RandomParams p;
  p.n_clients = n;
  p.n_facilities = m;
  p.ell = ell;
  p.clients_in_facilities = clients_in_facilities;
  ksvc::Rng rng(seed);
  return ksvc::gen_random(p, rng);
}

}  // namespace fx
