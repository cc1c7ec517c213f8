#pragma once

// End-to-end solve: build the candidate list, partition every candidate, keep
// the cheapest feasible solution.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <optional>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "ksvc/errors.hpp"
#include "ksvc/list_builder.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/partition.hpp"

namespace ksvc {

struct Provenance {
  std::size_t repetition = 0;
  std::size_t index = 0;
  std::uint64_t seed = 0;
};

struct Solution {
  CenterSet centers;
  Clustering clustering{0, {}};
  double cost = 0.0;
  Provenance provenance;
  std::size_t candidates_evaluated = 0;
  std::vector<std::size_t> seeds;  // client indices picked by the seeding step
  ResolvedParams resolved;
};

struct SolveOptions {
  unsigned parallel = 1;  // worker threads; 0 means hardware concurrency
  bool early_exit = false;
  std::optional<std::vector<std::size_t>> seeds;
};

struct Evaluation {
  double cost = 0.0;
  Clustering clustering{0, {}};
};

inline Evaluation evaluate_candidate(const MetricInstance& instance, const CenterSet& centers,
                                     const ConstraintSpec& spec) {
  auto result = partition(instance, centers, spec);
  return {result.cost, std::move(result.clustering)};
}

/// List parameters adjusted for the constraint: outliers seed k + m centers.
inline AlgorithmParams params_for(const AlgorithmParams& params, const ConstraintSpec& spec) {
  AlgorithmParams out = params;
  if (spec.kind == ConstraintKind::outlier) out.extra_seeds = spec.outliers;
  return out;
}

namespace detail {

struct Best {
  double cost = 0.0;
  std::size_t repetition = 0;
  std::size_t index = 0;
  std::optional<CenterSet> centers;
  std::optional<Clustering> clustering;

  bool beats(const Best& other) const {
    if (!other.centers) return true;
    return std::tie(cost, repetition, index) < std::tie(other.cost, other.repetition, other.index);
  }
};

}  // namespace detail

/// Minimum-cost candidate of a list, ties broken by (repetition, index) so
/// every worker count returns the same answer.
inline Solution solve_list(const MetricInstance& instance, CandidateList& list, const ConstraintSpec& spec,
                           const SolveOptions& options = {}) {
  spec.check_feasible(instance.num_clients(), list.k());
  unsigned workers = options.parallel == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.parallel;

  std::mutex list_mutex;
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> evaluated{0};
  std::vector<detail::Best> best(workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&](unsigned w) {
    try {
      for (;;) {
        if (stop.load()) return;
        std::optional<Candidate> candidate;
        {
          std::lock_guard lock(list_mutex);
          candidate = list.next();
        }
        if (!candidate) return;
        auto eval = evaluate_candidate(instance, candidate->centers, spec);
        evaluated.fetch_add(1);
        detail::Best mine{eval.cost, candidate->repetition, candidate->index, std::move(candidate->centers),
                          std::move(eval.clustering)};
        if (mine.beats(best[w])) best[w] = std::move(mine);
        if (options.early_exit && best[w].cost == 0.0) stop.store(true);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      stop.store(true);
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  detail::Best overall;
  for (auto& b : best) {
    if (b.centers && b.beats(overall)) overall = std::move(b);
  }
  if (!overall.centers) throw std::logic_error("solve: the candidate list was empty");

  Solution solution;
  solution.centers = std::move(*overall.centers);
  solution.clustering = std::move(*overall.clustering);
  solution.cost = overall.cost;
  solution.provenance = {overall.repetition, overall.index, 0};
  solution.candidates_evaluated = evaluated.load();
  solution.seeds = list.seeds();
  return solution;
}

inline Solution solve(const MetricInstance& instance, std::size_t k, const ConstraintSpec& spec,
                      const AlgorithmParams& params, std::uint64_t seed, const SolveOptions& options = {}) {
  spec.check_feasible(instance.num_clients(), k);
  const AlgorithmParams adjusted = params_for(params, spec);
  CandidateList list = build_list(instance, k, adjusted, seed, options.seeds);
  Solution solution = solve_list(instance, list, spec, options);
  solution.provenance.seed = seed;
  solution.resolved = resolve_params(adjusted, k, instance.ell());
  return solution;
}

}  // namespace ksvc
