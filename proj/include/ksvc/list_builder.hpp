#pragma once

// The sampling-based list algorithm: seed, D^ell-sample a multiset M per
// repetition, pool the k nearest facilities of every point of M, and emit
// every k-subset of the pool as a candidate center set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ksvc/combinatorics.hpp"
#include "ksvc/errors.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/rng.hpp"
#include "ksvc/sampling.hpp"

namespace ksvc {

enum class ListMode { theory, practical };
enum class SampleMethod { inverse_cdf, exponential_keys };

struct AlgorithmParams {
  double epsilon = 0.5;
  std::size_t eta = 0;          // 0 selects the mode's default
  std::size_t repetitions = 0;  // 0 selects the mode's default
  ListMode mode = ListMode::practical;
  double alpha = 1.0;           // approximation factor credited to the seeding step
  std::size_t extra_seeds = 0;  // outlier budget m: seeding picks k + m centers
  SampleMethod sample_method = SampleMethod::inverse_cdf;
  bool dedup = false;
  std::uint64_t theory_cap = 1'000'000;  // refuse theory mode when eta * k exceeds this
};

using BigRational = boost::multiprecision::cpp_rational;

struct TheoryConstants {
  BigRational beta;
  BigRational gamma;
  BigRational eta;
  BigInt eta_ceil;
};

/// Closed-form beta, gamma, eta in exact rational arithmetic. epsilon and
/// alpha enter as the exact binary value of the double; ell must be integral.
inline TheoryConstants theory_constants(double epsilon, unsigned ell, std::size_t k, double alpha) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("theory constants: epsilon must lie in (0, 1]");
  if (ell == 0) throw DomainError("theory constants: ell must be a positive integer");
  if (!(alpha >= 1.0)) throw DomainError("theory constants: alpha must be >= 1");
  const BigRational eps(epsilon);
  auto ipow = [](BigRational base, unsigned exp) {
    BigRational out(1);
    for (unsigned i = 0; i < exp; ++i) out *= base;
    return out;
  };
  const BigRational l(ell);
  const BigRational three(3);
  const BigRational ell_pow = ipow(l, ell);

  TheoryConstants c;
  c.beta = ipow(BigRational(4), ell - 1) * (ell_pow * ipow(three, ell * ell + 4 * ell + 3) / ipow(eps, ell + 1) + 1);
  c.gamma = ell_pow * ipow(three, ell * ell + 5 * ell + 1) / ipow(eps, ell);
  c.eta = BigRational(alpha) * c.beta * c.gamma * BigRational(static_cast<unsigned long long>(k)) *
          ipow(three, ell + 2) / ipow(eps, 2);
  const BigInt num = boost::multiprecision::numerator(c.eta);
  const BigInt den = boost::multiprecision::denominator(c.eta);
  c.eta_ceil = (num + den - 1) / den;
  return c;
}

/// Sample counts actually used by a run.
struct ResolvedParams {
  std::size_t eta = 0;
  std::size_t repetitions = 0;
  std::size_t seed_count = 0;
};

inline ResolvedParams resolve_params(const AlgorithmParams& params, std::size_t k, double ell) {
  if (k == 0) throw DomainError("list: k must be positive");
  if (!(params.epsilon > 0.0 && params.epsilon <= 1.0)) throw DomainError("list: epsilon must lie in (0, 1]");
  ResolvedParams out;
  out.seed_count = k + params.extra_seeds;
  if (params.mode == ListMode::theory) {
    if (ell != std::floor(ell)) throw DomainError("list: theory mode needs an integral ell");
    const auto c = theory_constants(params.epsilon, static_cast<unsigned>(ell), k, params.alpha);
    const BigInt total = c.eta_ceil * BigInt(static_cast<unsigned long long>(k));
    if (total > BigInt(params.theory_cap) || k >= 63) {
      throw DomainError("list: theory mode refuses to run, eta*k = " + total.str() + " exceeds the cap of " +
                        std::to_string(params.theory_cap));
    }
    out.eta = static_cast<std::size_t>(c.eta_ceil);
    out.repetitions = std::size_t{1} << k;
    return out;
  }
  if (params.eta > 0) {
    out.eta = params.eta;
  } else {
    const double scaled = 10.0 * static_cast<double>(k + params.extra_seeds) / (params.epsilon * params.epsilon);
    out.eta = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
  }
  out.repetitions = params.repetitions > 0 ? params.repetitions : (k >= 6 ? 64 : std::size_t{1} << k);
  return out;
}

/// The k facilities nearest to a point, sorted by (distance, facility index).
inline std::vector<std::size_t> k_nearest_facilities(const MetricInstance& instance, std::size_t point,
                                                     std::size_t k) {
  const std::size_t m = instance.num_facilities();
  if (k > m) throw DomainError("k_nearest_facilities: k exceeds |L|");
  std::vector<std::pair<double, std::size_t>> order(m);
  for (std::size_t j = 0; j < m; ++j) order[j] = {instance.distance(point, instance.facility_point(j)), j};
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = order[i].second;
  return out;
}

/// Hard-assignment selection: the i-th pick is anchors[i] when it is among
/// nearest_sets[i], otherwise the first entry of nearest_sets[i] not taken yet.
/// Anchors (distinct) are placed before any fallback pick so a fallback can
/// never claim an anchor that a later set still needs.
inline CenterSet find_facilities(std::span<const std::vector<std::size_t>> nearest_sets,
                                 std::span<const std::size_t> anchors) {
  const std::size_t k = nearest_sets.size();
  if (anchors.size() != k) throw DomainError("find_facilities: need one anchor per nearest set");
  std::vector<std::size_t> picked(k, kNone);
  auto taken = [&](std::size_t f) { return std::find(picked.begin(), picked.end(), f) != picked.end(); };
  for (std::size_t i = 0; i < k; ++i) {
    const auto& near = nearest_sets[i];
    if (near.size() != k) throw DomainError("find_facilities: every nearest set must hold exactly k facilities");
    if (std::find(near.begin(), near.end(), anchors[i]) != near.end()) {
      if (taken(anchors[i])) throw DomainError("find_facilities: anchors must be distinct");
      picked[i] = anchors[i];
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (picked[i] != kNone) continue;
    const auto& near = nearest_sets[i];
    auto it = std::find_if(near.begin(), near.end(), [&](std::size_t f) { return !taken(f); });
    if (it == near.end()) throw std::logic_error("find_facilities: nearest set exhausted");
    picked[i] = *it;
  }
  return CenterSet(std::move(picked));
}

struct Repetition {
  std::size_t index = 0;
  std::vector<std::size_t> samples;  // the multiset M with the seeds appended (client indices)
  std::vector<std::size_t> pool;     // T: sorted facility indices
};

struct Candidate {
  std::size_t repetition = 0;
  std::size_t index = 0;  // position within the repetition's enumeration
  CenterSet centers;
};

/// Lazily enumerated list of candidate center sets. Repetitions are produced
/// on demand; only the current repetition's pool is held.
class CandidateList {
 public:
  using RepetitionSource = std::function<Repetition(std::size_t)>;

  CandidateList(std::size_t k, std::size_t repetitions, RepetitionSource source, std::vector<std::size_t> seeds,
                bool dedup = false)
      : k_(k), repetitions_(repetitions), source_(std::move(source)), seeds_(std::move(seeds)), dedup_(dedup) {}

  std::optional<Candidate> next() {
    for (;;) {
      if (current_ && enumerator_ && enumerator_->next()) {
        std::vector<std::size_t> facilities;
        facilities.reserve(k_);
        for (std::size_t i : enumerator_->current()) facilities.push_back(current_->pool[i]);
        const std::size_t index = index_in_rep_++;
        if (dedup_ && !seen_.insert(facilities).second) continue;
        ++emitted_;
        return Candidate{current_->index, index, CenterSet(std::move(facilities))};
      }
      if (next_rep_ >= repetitions_) return std::nullopt;
      current_ = source_(next_rep_++);
      index_in_rep_ = 0;
      if (current_->pool.size() < k_) {
        ++skipped_;
        std::clog << "ksvc: repetition " << current_->index << " pooled only " << current_->pool.size()
                  << " facilities (k=" << k_ << "); skipped\n";
        enumerator_.reset();
        continue;
      }
      enumerator_.emplace(current_->pool.size(), k_);
    }
  }

  std::size_t k() const { return k_; }
  std::size_t repetitions() const { return repetitions_; }
  const std::vector<std::size_t>& seeds() const { return seeds_; }
  Repetition repetition(std::size_t r) const { return source_(r); }
  std::size_t emitted() const { return emitted_; }
  std::size_t skipped_repetitions() const { return skipped_; }

 private:
  std::size_t k_;
  std::size_t repetitions_;
  RepetitionSource source_;
  std::vector<std::size_t> seeds_;
  bool dedup_;
  std::size_t next_rep_ = 0;
  std::optional<Repetition> current_;
  std::optional<KSubsetEnumerator> enumerator_;
  std::size_t index_in_rep_ = 0;
  std::size_t emitted_ = 0;
  std::size_t skipped_ = 0;
  std::set<std::vector<std::size_t>> seen_;
};

/// Union of the k nearest facilities over the given clients, sorted.
inline std::vector<std::size_t> pool_nearest(const MetricInstance& instance, std::span<const std::size_t> clients,
                                             std::size_t k) {
  std::vector<std::size_t> unique(clients.begin(), clients.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<std::size_t> pool;
  for (std::size_t x : unique) {
    const auto near = k_nearest_facilities(instance, instance.client_point(x), k);
    pool.insert(pool.end(), near.begin(), near.end());
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  return pool;
}

/// D^ell samples of repetition r. Sample j of repetition r draws from its own
/// substream (seed, r, j), so repetitions can be produced in any order.
inline std::vector<std::size_t> draw_repetition_samples(const DlSampler& sampler, std::size_t count,
                                                        std::uint64_t seed, std::size_t r, SampleMethod method) {
  std::vector<std::size_t> samples;
  samples.reserve(count);
  const auto& weights = sampler.distribution().weights;
  for (std::size_t j = 0; j < count; ++j) {
    Rng rng = Rng::substream(seed, r, j);
    if (method == SampleMethod::inverse_cdf) {
      samples.push_back(sampler.draw(rng));
    } else {
      WeightedReservoir slot;
      for (std::size_t x = 0; x < weights.size(); ++x) slot.offer(x, weights[x], rng);
      samples.push_back(*slot.selected());
    }
  }
  return samples;
}

/// Builds the candidate list. When `seeds` is given it replaces the seeding
/// step (used to couple offline and streaming runs).
inline CandidateList build_list(const MetricInstance& instance, std::size_t k, const AlgorithmParams& params,
                                std::uint64_t seed, std::optional<std::vector<std::size_t>> seeds = std::nullopt) {
  if (k > instance.num_facilities()) {
    throw InfeasibleError("list: k=" + std::to_string(k) + " exceeds |L|=" + std::to_string(instance.num_facilities()));
  }
  if (k > instance.num_clients()) {
    throw InfeasibleError("list: k=" + std::to_string(k) + " exceeds |C|=" + std::to_string(instance.num_clients()));
  }
  const ResolvedParams resolved = resolve_params(params, k, instance.ell());
  std::vector<std::size_t> seed_set;
  if (seeds) {
    seed_set = std::move(*seeds);
    for (std::size_t s : seed_set) {
      if (s >= instance.num_clients()) throw DomainError("list: seed client index out of range");
    }
  } else {
    Rng rng = Rng::substream(seed, kSeedingStream, 0);
    seed_set = seed_kmeanspp(instance, std::min(resolved.seed_count, instance.num_clients()), rng).centers;
  }

  auto sampler = std::make_shared<const DlSampler>(dl_distribution(instance, seed_set));
  const std::size_t count = resolved.eta * k;
  const SampleMethod method = params.sample_method;
  auto source = [instance, sampler, seed_set, count, seed, k, method](std::size_t r) {
    Repetition rep;
    rep.index = r;
    rep.samples = draw_repetition_samples(*sampler, count, seed, r, method);
    rep.samples.insert(rep.samples.end(), seed_set.begin(), seed_set.end());
    rep.pool = pool_nearest(instance, rep.samples, k);
    return rep;
  };
  return CandidateList(k, resolved.repetitions, std::move(source), std::move(seed_set), params.dedup);
}

}  // namespace ksvc
