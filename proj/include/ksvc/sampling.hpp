#pragma once

// D^ell-sampling, k-means++ style seeding and single-slot weighted reservoirs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ksvc/errors.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/rng.hpp"

namespace ksvc {

/// Per-client weights min_{f in F} d(f, x)^ell and their sum.
struct DlDistribution {
  std::vector<double> weights;
  double total = 0.0;

  /// Exact sampling probability of a client; uniform when the total is zero.
  double probability(std::size_t client) const {
    if (total > 0.0) return weights[client] / total;
    return 1.0 / static_cast<double>(weights.size());
  }
};

/// D^ell weights with respect to a set of client indices acting as centers.
/// An empty center set gives the uniform distribution.
inline DlDistribution dl_distribution(const MetricInstance& instance, std::span<const std::size_t> center_clients) {
  DlDistribution dist;
  const std::size_t n = instance.num_clients();
  if (center_clients.empty()) {
    dist.weights.assign(n, 0.0);
    return dist;
  }
  std::vector<std::size_t> points;
  points.reserve(center_clients.size());
  for (std::size_t c : center_clients) {
    if (c >= n) throw DomainError("dl_distribution: center client index out of range");
    points.push_back(instance.client_point(c));
  }
  dist.weights.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    dist.weights[x] = nearest_cost(instance, points, x);
    dist.total += dist.weights[x];
  }
  return dist;
}

/// Inverse-CDF sampler over a fixed DlDistribution; one uniform per draw.
class DlSampler {
 public:
  explicit DlSampler(DlDistribution dist) : dist_(std::move(dist)) {
    cumulative_.reserve(dist_.weights.size());
    double running = 0.0;
    for (double w : dist_.weights) {
      running += w;
      cumulative_.push_back(running);
    }
  }

  std::size_t draw(Rng& rng) const {
    const std::size_t n = cumulative_.size();
    if (n == 0) throw DomainError("dl_sample: no clients");
    if (!(cumulative_.back() > 0.0)) return static_cast<std::size_t>(rng.index(n));
    const double target = rng.uniform01() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) {
      // Rounding pushed the target to the end; take the last client with positive weight.
      std::size_t i = n - 1;
      while (dist_.weights[i] <= 0.0) --i;
      return i;
    }
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

  const DlDistribution& distribution() const { return dist_; }

 private:
  DlDistribution dist_;
  std::vector<double> cumulative_;
};

/// One D^ell draw with respect to the given centers (client indices).
inline std::size_t dl_sample(const MetricInstance& instance, std::span<const std::size_t> center_clients, Rng& rng) {
  return DlSampler(dl_distribution(instance, center_clients)).draw(rng);
}

struct SeedingResult {
  std::vector<std::size_t> centers;  // client indices; a multiset
  double cost = 0.0;                 // Phi(centers, C)
  std::string alpha_note;
};

/// k-means++ style seeding on (C, C): a uniform first center, then D^ell draws
/// against the centers chosen so far.
inline SeedingResult seed_kmeanspp(const MetricInstance& instance, std::size_t k, Rng& rng) {
  const std::size_t n = instance.num_clients();
  if (k == 0) throw DomainError("seeding: k must be positive");
  if (k > n) {
    throw InfeasibleError("seeding: k=" + std::to_string(k) + " exceeds |C|=" + std::to_string(n));
  }
  SeedingResult result;
  result.alpha_note = "k-means++ seeding on (C,C); expected O(2^(2ell) log k)-approximation";
  result.centers.push_back(static_cast<std::size_t>(rng.index(n)));

  std::vector<double> weights(n);
  const std::size_t first = instance.client_point(result.centers.front());
  for (std::size_t x = 0; x < n; ++x) weights[x] = instance.cost(first, instance.client_point(x));

  while (result.centers.size() < k) {
    double total = 0.0;
    for (double w : weights) total += w;
    std::size_t pick;
    if (!(total > 0.0)) {
      pick = static_cast<std::size_t>(rng.index(n));
    } else {
      const double target = rng.uniform01() * total;
      double running = 0.0;
      pick = n;
      for (std::size_t x = 0; x < n; ++x) {
        running += weights[x];
        if (running > target) {
          pick = x;
          break;
        }
      }
      if (pick == n) {
        pick = n - 1;
        while (weights[pick] <= 0.0) --pick;
      }
    }
    result.centers.push_back(pick);
    const std::size_t p = instance.client_point(pick);
    for (std::size_t x = 0; x < n; ++x) weights[x] = std::min(weights[x], instance.cost(p, instance.client_point(x)));
  }
  for (double w : weights) result.cost += w;
  return result;
}

/// Single-slot weighted reservoir using exponential keys: each offered item
/// draws u in (0,1] and gets key -ln(u)/w; the smallest key wins, which selects
/// item i with probability w_i / sum(w). The same draw doubles as a uniform
/// reservoir for the all-zero-weight fallback. Exactly one draw per offer.
class WeightedReservoir {
 public:
  void offer(std::size_t id, double weight, Rng& rng) {
    if (!(weight >= 0.0)) throw DomainError("weighted reservoir: weights must be nonnegative");
    const double exponential = -std::log(rng.uniform_open());
    if (weight > 0.0) {
      const double key = exponential / weight;
      if (!weighted_ || key < best_key_) {
        best_key_ = key;
        weighted_ = id;
      }
    }
    if (!uniform_ || exponential < uniform_key_) {
      uniform_key_ = exponential;
      uniform_ = id;
    }
  }

  std::optional<std::size_t> selected() const { return weighted_ ? weighted_ : uniform_; }

 private:
  double best_key_ = std::numeric_limits<double>::infinity();
  double uniform_key_ = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> weighted_;
  std::optional<std::size_t> uniform_;
};

/// One pass over (id, weight) pairs; returns an id with probability weight / sum.
template <std::ranges::input_range Items>
std::size_t weighted_reservoir(Items&& items, Rng& rng) {
  WeightedReservoir slot;
  for (const auto& [id, weight] : items) slot.offer(id, weight, rng);
  if (!slot.selected()) throw DomainError("weighted reservoir: empty stream");
  return *slot.selected();
}

}  // namespace ksvc
