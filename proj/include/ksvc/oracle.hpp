#pragma once

// Exhaustive solvers for tiny instances: every center set for the
// unconstrained problem, every feasible labeling for the constrained one.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ksvc/combinatorics.hpp"
#include "ksvc/errors.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/partition.hpp"

namespace ksvc {

struct OracleBudget {
  std::size_t max_clients = 8;
  std::size_t max_facilities = 7;
  std::size_t max_k = 3;
  std::uint64_t max_states = 10'000'000;
};

struct UnconstrainedOptimum {
  CenterSet centers;  // facility indices of the searched instance
  double cost = 0.0;
};

struct ConstrainedOptimum {
  Clustering clustering{0, {}};
  CenterSet centers;  // centers[j] serves cluster j
  double cost = 0.0;
};

namespace detail {

inline void check_budget(const OracleBudget& budget, std::size_t clients, std::size_t facilities, std::size_t k,
                         const BigInt& states) {
  auto fail = [](const std::string& what) { throw BudgetError("oracle: " + what); };
  if (clients > budget.max_clients) {
    fail(std::to_string(clients) + " clients exceed the budget of " + std::to_string(budget.max_clients));
  }
  if (facilities > budget.max_facilities) {
    fail(std::to_string(facilities) + " facilities exceed the budget of " + std::to_string(budget.max_facilities));
  }
  if (k > budget.max_k) fail("k=" + std::to_string(k) + " exceeds the budget of " + std::to_string(budget.max_k));
  if (states > BigInt(budget.max_states)) {
    fail(states.str() + " states exceed the budget of " + std::to_string(budget.max_states));
  }
}

inline BigInt ipow(std::size_t base, std::size_t exp) {
  BigInt out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace detail

/// OPT(L, C) by trying every k-subset of L with nearest-center assignment.
/// With centers_from_clients the candidate centers are the clients, giving
/// OPT(C, C); the returned indices are then client indices.
inline UnconstrainedOptimum oracle_unconstrained(const MetricInstance& instance, std::size_t k,
                                                 const OracleBudget& budget = {}, bool centers_from_clients = false) {
  const MetricInstance searched = centers_from_clients ? instance.clients_as_facilities() : instance;
  const std::size_t m = searched.num_facilities();
  if (k == 0) throw DomainError("oracle: k must be positive");
  if (k > m) throw InfeasibleError("oracle: k exceeds the number of candidate centers");
  detail::check_budget(budget, instance.num_clients(), centers_from_clients ? 0 : m, k, binomial(m, k));

  const auto clients = all_clients(searched);
  UnconstrainedOptimum best{CenterSet{}, std::numeric_limits<double>::infinity()};
  KSubsetEnumerator subsets(m, k);
  while (subsets.next()) {
    CenterSet centers(subsets.current());
    const double cost = phi(searched, centers, clients);
    if (cost < best.cost) best = {std::move(centers), cost};
  }
  return best;
}

/// Exact Psi* optimum over all clusterings meeting the constraint (and over
/// all outlier sets for the outlier kind). Centers come from the min-cost
/// matching of clusters to facilities; clusters may be empty when the
/// constraint allows it.
inline ConstrainedOptimum oracle_constrained(const MetricInstance& instance, std::size_t k,
                                             const ConstraintSpec& spec, const OracleBudget& budget = {},
                                             unsigned parallel = 1) {
  const std::size_t n = instance.num_clients();
  spec.check_feasible(n, k);
  if (k > instance.num_facilities()) throw InfeasibleError("oracle: k exceeds |L|");
  const std::size_t m = spec.excluded_count();
  const std::size_t kept = n - m;
  const bool symmetric = spec.symmetric(k);
  // With symmetry the first kept client is pinned to cluster 0.
  const std::size_t free_digits = symmetric && kept > 0 ? kept - 1 : kept;
  detail::check_budget(budget, n, instance.num_facilities(), k, binomial(n, m) * detail::ipow(k, free_digits));

  const auto bounds = spec.bounds_for(k);
  auto feasible = [&](const std::vector<std::size_t>& sizes) {
    for (std::size_t j = 0; j < k && !bounds.empty(); ++j) {
      if (spec.kind == ConstraintKind::r_gather && sizes[j] < bounds[j]) return false;
      if (spec.kind == ConstraintKind::r_capacity && sizes[j] > bounds[j]) return false;
    }
    return true;
  };

  // Base-k counter over every digit but the leading one; false on wraparound.
  auto advance = [k](std::vector<std::size_t>& digits) {
    for (std::size_t pos = digits.size(); pos-- > 1;) {
      if (++digits[pos] < k) return true;
      digits[pos] = 0;
    }
    return false;
  };

  using Result = std::optional<ConstrainedOptimum>;
  // Enumerates labelings of the kept clients whose leading free digit is `lead`.
  auto search = [&](std::size_t lead) -> Result {
    Result best;
    KSubsetEnumerator outliers(n, m);
    std::vector<std::size_t> labels(n);
    std::vector<std::size_t> kept_clients;
    while (outliers.next()) {
      std::vector<bool> dropped(n, false);
      for (std::size_t z : outliers.current()) dropped[z] = true;
      kept_clients.clear();
      for (std::size_t x = 0; x < n; ++x) {
        if (!dropped[x]) kept_clients.push_back(x);
        labels[x] = Clustering::excluded;
      }
      const std::size_t pinned = kept - free_digits;  // 0 or 1
      std::vector<std::size_t> digits(free_digits, 0);
      if (free_digits > 0) digits[0] = lead;
      do {
        for (std::size_t i = 0; i < pinned; ++i) labels[kept_clients[i]] = 0;
        for (std::size_t i = 0; i < free_digits; ++i) labels[kept_clients[pinned + i]] = digits[i];
        Clustering clustering(k, labels);
        if (feasible(clustering.sizes())) {
          auto recovered = mcpm_centers(instance, clustering, true);
          if (!best || recovered.report.total < best->cost) {
            best = ConstrainedOptimum{clustering, std::move(recovered.centers), recovered.report.total};
          }
        }
      } while (advance(digits));
    }
    return best;
  };

  const std::size_t leads = free_digits > 0 ? k : 1;
  std::vector<Result> partial(leads);
  if (parallel > 1 && leads > 1) {
    std::vector<std::future<Result>> jobs;
    for (std::size_t d = 0; d < leads; ++d) jobs.push_back(std::async(std::launch::async, search, d));
    for (std::size_t d = 0; d < leads; ++d) partial[d] = jobs[d].get();
  } else {
    for (std::size_t d = 0; d < leads; ++d) partial[d] = search(d);
  }
  Result best;
  for (auto& r : partial) {
    if (r && (!best || r->cost < best->cost)) best = std::move(r);
  }
  if (!best) throw InfeasibleError("oracle: no feasible clustering");
  return std::move(*best);
}

}  // namespace ksvc
