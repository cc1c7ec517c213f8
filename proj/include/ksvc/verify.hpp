#pragma once

// Invariant checks runnable against any instance: metric axioms, the
// power-triangle inequalities, the averaging bounds behind the sampling step,
// OPT(C,C) <= 2^ell OPT(L,C), and the gadget-instance regression.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ksvc/instances.hpp"
#include "ksvc/list_builder.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/oracle.hpp"
#include "ksvc/rng.hpp"

namespace ksvc {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::string detail;
};

namespace detail {

inline std::vector<std::size_t> universe_points(const MetricInstance& instance) {
  std::vector<std::size_t> points = instance.clients();
  points.insert(points.end(), instance.facilities().begin(), instance.facilities().end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

inline CheckResult finish(CheckResult r) {
  r.passed = r.violations == 0;
  return r;
}

// A nonempty uniformly random subset of client indices.
inline std::vector<std::size_t> random_subset(std::size_t n, Rng& rng) {
  std::vector<std::size_t> out;
  while (out.empty()) {
    for (std::size_t x = 0; x < n; ++x) {
      if (rng() & 1) out.push_back(x);
    }
  }
  return out;
}

// min over facilities f of Phi({f}, S).
inline double best_single_facility(const MetricInstance& instance, const std::vector<std::size_t>& subset) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f : instance.facilities()) {
    const std::size_t point = f;
    best = std::min(best, phi_points(instance, std::span<const std::size_t>(&point, 1), subset));
  }
  return best;
}

}  // namespace detail

/// Zero self-distance, symmetry, nonnegativity and the triangle inequality on random triples.
inline CheckResult check_metric_axioms(const MetricInstance& instance, Rng& rng, std::size_t trials = 10'000) {
  CheckResult r{"metric axioms", true, trials, 0, ""};
  const auto points = detail::universe_points(instance);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t a = points[rng.index(points.size())];
    const std::size_t b = points[rng.index(points.size())];
    const std::size_t c = points[rng.index(points.size())];
    const double ab = instance.distance(a, b);
    const bool ok = instance.distance(a, a) == 0.0 && ab >= 0.0 && approx_eq(ab, instance.distance(b, a)) &&
                    approx_le(ab, instance.distance(a, c) + instance.distance(c, b));
    if (!ok && r.violations++ == 0) {
      r.detail = "first violation at points (" + std::to_string(a) + "," + std::to_string(b) + "," +
                 std::to_string(c) + ")";
    }
  }
  return detail::finish(r);
}

/// d^ell(a,b) <= 2^(ell-1) (d^ell(a,c) + d^ell(c,b)) on random triples and
/// d^ell(a,b) <= 3^(ell-1) (d^ell(a,c) + d^ell(c,d) + d^ell(d,b)) on random quadruples.
inline CheckResult check_power_triangle(const MetricInstance& instance, Rng& rng, std::size_t trials = 10'000) {
  CheckResult r{"power triangle (triples, quadruples)", true, 2 * trials, 0, ""};
  const auto points = detail::universe_points(instance);
  const double ell = instance.ell();
  auto pick = [&]() { return points[rng.index(points.size())]; };
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t a = pick(), b = pick(), c = pick(), d = pick();
    const double lhs = instance.cost(a, b);
    const double triple = std::pow(2.0, ell - 1.0) * (instance.cost(a, c) + instance.cost(c, b));
    const double quad = std::pow(3.0, ell - 1.0) * (instance.cost(a, c) + instance.cost(c, d) + instance.cost(d, b));
    if (!approx_le(lhs, triple) && r.violations++ == 0) r.detail = "triple violation";
    if (!approx_le(lhs, quad) && r.violations++ == 0) r.detail = "quadruple violation";
  }
  return detail::finish(r);
}

/// For random client subsets S with t(x) the facility nearest to x:
/// mean over x in S of Phi({t(x)}, S) <= 3^ell * min_f Phi({f}, S).
inline CheckResult check_nearest_facility_average(const MetricInstance& instance, Rng& rng,
                                                  std::size_t subsets = 100) {
  CheckResult r{"nearest-facility average <= 3^ell * best facility", true, subsets, 0, ""};
  std::vector<std::size_t> nearest(instance.num_clients());
  for (std::size_t x = 0; x < instance.num_clients(); ++x) {
    nearest[x] = instance.facility_point(k_nearest_facilities(instance, instance.client_point(x), 1).front());
  }
  for (std::size_t t = 0; t < subsets; ++t) {
    const auto subset = detail::random_subset(instance.num_clients(), rng);
    double sum = 0.0;
    for (std::size_t x : subset) sum += phi_points(instance, std::span<const std::size_t>(&nearest[x], 1), subset);
    const double mean = sum / static_cast<double>(subset.size());
    const double bound = std::pow(3.0, instance.ell()) * detail::best_single_facility(instance, subset);
    if (!approx_le(mean, bound) && r.violations++ == 0) {
      std::ostringstream msg;
      msg << "mean " << mean << " > bound " << bound;
      r.detail = msg.str();
    }
  }
  return detail::finish(r);
}

/// For random client subsets S: mean over x in S of Phi({x}, S) <= 2^ell * min_f Phi({f}, S).
inline CheckResult check_client_average(const MetricInstance& instance, Rng& rng, std::size_t subsets = 100) {
  CheckResult r{"client-center average <= 2^ell * best facility", true, subsets, 0, ""};
  for (std::size_t t = 0; t < subsets; ++t) {
    const auto subset = detail::random_subset(instance.num_clients(), rng);
    double sum = 0.0;
    for (std::size_t x : subset) {
      const std::size_t point = instance.client_point(x);
      sum += phi_points(instance, std::span<const std::size_t>(&point, 1), subset);
    }
    const double mean = sum / static_cast<double>(subset.size());
    const double bound = std::pow(2.0, instance.ell()) * detail::best_single_facility(instance, subset);
    if (!approx_le(mean, bound) && r.violations++ == 0) {
      std::ostringstream msg;
      msg << "mean " << mean << " > bound " << bound;
      r.detail = msg.str();
    }
  }
  return detail::finish(r);
}

/// OPT(C, C) <= 2^ell * OPT(L, C), both by exhaustive search.
inline CheckResult check_client_centers_bound(const MetricInstance& instance, std::size_t k,
                                              const OracleBudget& budget = {}) {
  CheckResult r{"OPT(C,C) <= 2^ell * OPT(L,C)", true, 1, 0, ""};
  const double with_facilities = oracle_unconstrained(instance, k, budget).cost;
  const double with_clients = oracle_unconstrained(instance, k, budget, true).cost;
  const double bound = std::pow(2.0, instance.ell()) * with_facilities;
  std::ostringstream msg;
  msg << "OPT(C,C)=" << with_clients << " OPT(L,C)=" << with_facilities;
  r.detail = msg.str();
  if (!approx_le(with_clients, bound)) r.violations = 1;
  return detail::finish(r);
}

/// The slack in the gadget lower bound: 3^(ell-1)*ell*delta + 3^ell*k/|C|.
inline double gadget_slack(const BadInstanceParams& params) {
  const double n = static_cast<double>(params.k * params.cluster_size);
  return std::pow(3.0, params.ell - 1.0) * params.ell * params.delta +
         std::pow(3.0, params.ell) * static_cast<double>(params.k) / n;
}

/// Gadget-instance regression: the hubs serve the target at cost |C|, each
/// decoy serves its gadget at (3-delta)^ell (s-1) + (1-delta)^ell, the
/// candidate list never contains a hub, and every listed center set costs at
/// least (3^ell - slack) |C| on the target clustering.
inline std::vector<CheckResult> check_bad_instance(const BadInstanceBundle& bundle, const AlgorithmParams& params,
                                                   std::uint64_t seed) {
  const auto& p = bundle.params;
  const auto& inst = bundle.instance;
  const double n = static_cast<double>(inst.num_clients());
  std::vector<CheckResult> out;

  CheckResult opt{"hubs serve the target at cost |C|", true, 1, 0, ""};
  const double hub_cost = psi(inst, bundle.optimal_centers, bundle.target_clustering).total;
  opt.detail = "cost " + std::to_string(hub_cost);
  if (!approx_eq(hub_cost, n)) opt.violations = 1;
  out.push_back(detail::finish(opt));

  CheckResult decoy{"decoy cost per gadget", true, 0, 0, ""};
  const double expected = std::pow(3.0 - p.delta, p.ell) * static_cast<double>(p.cluster_size - 1) +
                          std::pow(1.0 - p.delta, p.ell);
  for (std::size_t x = 0; x < inst.num_clients(); ++x) {
    const auto members = bundle.target_clustering.members(bundle.target_clustering.label(x));
    for (std::size_t f : bundle.decoys[x]) {
      ++decoy.trials;
      const std::size_t point = inst.facility_point(f);
      const double cost = phi_points(inst, std::span<const std::size_t>(&point, 1), members);
      if (!approx_eq(cost, expected, 1e-9)) ++decoy.violations;
    }
  }
  decoy.detail = "expected " + std::to_string(expected);
  out.push_back(detail::finish(decoy));

  CheckResult hubs{"no listed center set contains a hub", true, 0, 0, ""};
  CheckResult bound{"every listed center set costs >= (3^ell - slack)|C| on the target", true, 0, 0, ""};
  const double floor_cost = (std::pow(3.0, p.ell) - gadget_slack(p)) * n;
  double best = std::numeric_limits<double>::infinity();
  CandidateList list = build_list(inst, p.k, params, seed);
  while (auto c = list.next()) {
    ++hubs.trials;
    ++bound.trials;
    for (std::size_t h : bundle.optimal_centers) {
      if (c->centers.contains(h)) {
        ++hubs.violations;
        break;
      }
    }
    const double cost = psi(inst, c->centers, bundle.target_clustering).total;
    best = std::min(best, cost);
    if (cost < floor_cost - 1e-6) ++bound.violations;
  }
  std::ostringstream msg;
  msg << "min " << best << " vs floor " << floor_cost;
  bound.detail = msg.str();
  out.push_back(detail::finish(hubs));
  out.push_back(detail::finish(bound));
  return out;
}

}  // namespace ksvc
