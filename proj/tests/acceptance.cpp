// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "brute_force.hpp"
#include "fixtures.hpp"
#include "ksvc/ksvc.hpp"

using namespace ksvc;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// A random instance for the exactness criteria: |C| <= 7, |L| <= 6, either metric mode.
MetricInstance small_instance(std::size_t index, Rng& rng) {
  RandomParams p;
  p.n_clients = 3 + rng.index(5);
  p.n_facilities = 3 + rng.index(4);
  p.ell = index % 2 ? 2.0 : 1.0;
  p.mode = index % 3 == 0 ? MetricMode::matrix : MetricMode::euclidean;
  Rng gen = Rng::substream(2024, kGeneratorStream, index);
  return gen_random(p, gen);
}

Outcome partition_exactness() {
  const auto start = Clock::now();
  Rng rng(1);
  std::size_t mismatches = 0, compared = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto inst = small_instance(i, rng);
    const std::size_t n = inst.num_clients();
    const std::size_t k = std::min<std::size_t>(2 + rng.index(2), std::min(n, inst.num_facilities()));
    const CenterSet centers(bf::random_distinct(inst.num_facilities(), k, rng));
    std::vector<std::size_t> lower(k), upper(k);
    for (std::size_t j = 0; j < k; ++j) lower[j] = rng.index(n / k + 1);
    std::size_t total = 0;
    for (std::size_t j = 0; j < k; ++j) total += upper[j] = 1 + rng.index(n);
    if (total < n) upper[0] += n - total;
    const std::size_t m = rng.index(n);

    const double gather = partition_r_gather(inst, centers, lower).cost;
    const double cap = partition_r_capacity(inst, centers, upper).cost;
    const double out = partition_outlier(inst, centers, m).cost;
    mismatches += !bf::rel_eq(gather, bf::partition(inst, centers.facilities(), {bf::SizeRule::lower, lower}, 0));
    mismatches += !bf::rel_eq(cap, bf::partition(inst, centers.facilities(), {bf::SizeRule::upper, upper}, 0));
    mismatches += !bf::rel_eq(out, bf::partition(inst, centers.facilities(), {}, m));
    compared += 3;
  }
  const double elapsed = seconds_since(start);
  std::ostringstream msg;
  msg << compared << " partitions, " << mismatches << " mismatches, " << elapsed << " s";
  return {mismatches == 0 && elapsed < 120.0, msg.str()};
}

Outcome matching_exactness() {
  Rng rng(1);
  std::size_t mismatches = 0, compared = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto inst = small_instance(i, rng);
    const std::size_t n = inst.num_clients();
    const std::size_t k = std::min<std::size_t>(2 + rng.index(2), std::min(n, inst.num_facilities()));
    std::vector<std::size_t> labels(n);
    for (std::size_t x = 0; x < n; ++x) labels[x] = x < k ? x : rng.index(k);
    const auto centers = bf::random_distinct(inst.num_facilities(), k, rng);
    const Clustering c(k, labels);
    mismatches += !bf::rel_eq(psi(inst, CenterSet(centers), c).total, bf::psi(inst, centers, labels));
    mismatches += !bf::rel_eq(mcpm_centers(inst, c).report.total, bf::mcpm(inst, labels, k));
    compared += 2;
  }
  std::ostringstream msg;
  msg << compared << " comparisons, " << mismatches << " mismatches";
  return {mismatches == 0, msg.str()};
}

struct SuccessConfig {
  std::string name;
  ConstraintSpec spec;
  bool clients_in_facilities;
  double ell;
};

Outcome success_probability() {
  const auto start = Clock::now();
  const double eps = 0.5;
  const std::size_t runs = 20;
  std::vector<SuccessConfig> configs;
  for (double ell : {1.0, 2.0}) {
    for (bool inside : {false, true}) {
      const std::string suffix = std::string(inside ? " C in L" : " general") + " ell=" + (ell == 1.0 ? "1" : "2");
      configs.push_back({"unconstrained" + suffix, ConstraintSpec::unconstrained(), inside, ell});
      configs.push_back({"r_gather(2)" + suffix, ConstraintSpec::r_gather_uniform(2), inside, ell});
      configs.push_back({"r_capacity(5)" + suffix, ConstraintSpec::r_capacity_uniform(5), inside, ell});
      configs.push_back({"outlier(1)" + suffix, ConstraintSpec::outlier(1), inside, ell});
    }
  }
  OracleBudget budget;
  budget.max_facilities = 12;
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  std::size_t pooled_hits = 0, pooled_runs = 0;
  bool every_config = true;
  std::ostringstream msg;
  std::string worst = configs.front().name;
  double worst_rate = 2.0;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const auto& cfg = configs[ci];
    const double factor = (cfg.clients_in_facilities ? std::pow(2.0, cfg.ell) : std::pow(3.0, cfg.ell)) + eps;
    std::size_t hits = 0;
    for (std::size_t run = 0; run < runs; ++run) {
      RandomParams p;
      p.n_clients = 8;
      p.n_facilities = cfg.clients_in_facilities ? 2 : 5;
      p.ell = cfg.ell;
      p.clients_in_facilities = cfg.clients_in_facilities;
      Rng gen = Rng::substream(7000 + ci, kGeneratorStream, run);
      const auto inst = gen_random(p, gen);
      const double opt = oracle_constrained(inst, 2, cfg.spec, budget, threads).cost;
      AlgorithmParams params;
      params.epsilon = eps;
      params.eta = 40;
      params.repetitions = 4;
      SolveOptions options;
      options.parallel = threads;
      const double cost = solve(inst, 2, cfg.spec, params, 100 + run, options).cost;
      hits += cost <= factor * opt * (1 + 1e-9);
    }
    const double rate = static_cast<double>(hits) / runs;
    if (rate < worst_rate) {
      worst_rate = rate;
      worst = cfg.name;
    }
    every_config = every_config && 2 * hits >= runs;
    pooled_hits += hits;
    pooled_runs += runs;
  }
  const double elapsed = seconds_since(start);
  const double pooled = static_cast<double>(pooled_hits) / static_cast<double>(pooled_runs);
  msg << configs.size() << " configurations x " << runs << " runs, pooled " << pooled_hits << "/" << pooled_runs
      << ", worst " << worst << " at " << worst_rate << ", " << elapsed << " s";
  return {every_config && pooled >= 0.8 && elapsed < 300.0, msg.str()};
}

Outcome lower_bound_regression() {
  BadInstanceParams p;
  p.k = 2;
  p.cluster_size = 5;
  p.delta = 0.1;
  p.ell = 1.0;
  const auto bundle = gen_bad_instance(p);
  const double floor_cost = 23.0;
  const double slack_floor = (3.0 - gadget_slack(p)) * 10.0;
  bool ok = std::abs(slack_floor - floor_cost) < 1e-9;
  std::size_t listed = 0, with_hub = 0;
  double best = bf::kInf;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto list = build_list(bundle.instance, p.k, AlgorithmParams{}, seed);
    while (auto c = list.next()) {
      ++listed;
      for (std::size_t h : bundle.optimal_centers) with_hub += c->centers.contains(h);
      best = std::min(best, psi(bundle.instance, c->centers, bundle.target_clustering).total);
    }
  }
  ok = ok && with_hub == 0 && best >= floor_cost - 1e-6;
  std::ostringstream msg;
  msg << listed << " center sets over 5 seeds, " << with_hub << " containing a hub, min cost " << best
      << " vs floor " << floor_cost;
  return {ok, msg.str()};
}

Outcome invariant_suites() {
  std::size_t violations = 0, checks = 0;
  std::vector<MetricInstance> instances;
  for (std::size_t i = 0; i < 8; ++i) {
    RandomParams p;
    p.n_clients = 10;
    p.n_facilities = 6;
    p.ell = i % 2 ? 2.0 : 1.0 + 0.5 * (i % 4 == 2);
    p.mode = i % 3 == 0 ? MetricMode::matrix : MetricMode::euclidean;
    Rng gen = Rng::substream(31, kGeneratorStream, i);
    instances.push_back(gen_random(p, gen));
  }
  for (double ell : {1.0, 2.0}) {
    BadInstanceParams p;
    p.ell = ell;
    instances.push_back(gen_bad_instance(p).instance);
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    Rng rng(500 + i);
    for (const auto& r : {check_power_triangle(instances[i], rng, 10'000),
                          check_nearest_facility_average(instances[i], rng, 100),
                          check_client_average(instances[i], rng, 100)}) {
      violations += r.violations;
      ++checks;
    }
  }
  std::size_t fact_violations = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    RandomParams p;
    p.n_clients = 6 + i % 3;
    p.n_facilities = 5;
    p.ell = i % 2 ? 2.0 : 1.0;
    Rng gen = Rng::substream(37, kGeneratorStream, i);
    fact_violations += check_client_centers_bound(gen_random(p, gen), 2).violations;
  }
  std::ostringstream msg;
  msg << checks << " inequality suites on " << instances.size() << " instances with " << violations
      << " violations; OPT(C,C) bound on 50 instances with " << fact_violations << " violations";
  return {violations == 0 && fact_violations == 0, msg.str()};
}

Outcome streaming_parity() {
  bool ok = true;
  std::ostringstream msg;

  // Pass counters.
  std::size_t worst_list = 0, worst_outlier = 0, worst_flow = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = fx::random(40, 6, seed % 2 ? 2.0 : 1.0, 3000 + seed);
    const auto space = StreamSpace::from_instance(inst);
    AlgorithmParams params;
    params.eta = 5;
    params.sample_method = SampleMethod::exponential_keys;
    MemoryStream a = MemoryStream::from_instance(inst);
    stream_list(a, space, 2, params, seed);
    worst_list = std::max(worst_list, a.passes());
    MemoryStream b = MemoryStream::from_instance(inst);
    worst_outlier = std::max(worst_outlier, stream_solve(b, space, 2, ConstraintSpec::outlier(3), params, 0.5, seed).passes);
    MemoryStream c = MemoryStream::from_instance(inst);
    worst_flow =
        std::max(worst_flow, stream_solve(c, space, 2, ConstraintSpec::r_gather_uniform(8), params, 0.5, seed).passes);
    MemoryStream d = MemoryStream::from_instance(inst);
    worst_flow =
        std::max(worst_flow, stream_solve(d, space, 2, ConstraintSpec::r_capacity_uniform(25), params, 0.5, seed).passes);
  }
  ok = ok && worst_list <= 3 && worst_outlier <= 5 && worst_flow <= 6;
  msg << "passes list/outlier/flow " << worst_list << "/" << worst_outlier << "/" << worst_flow;

  // Representative-graph weights against a full recomputation.
  std::size_t weight_checks = 0, weight_violations = 0;
  for (double eps : {0.1, 0.5}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto inst = fx::random(50, 6, seed % 2 ? 2.0 : 1.0, 3100 + seed);
      const auto space = StreamSpace::from_instance(inst);
      const CenterSet centers({0, 2, 5});
      MemoryStream s = MemoryStream::from_instance(inst);
      const auto graph = build_representative_graph(s, space, centers, eps);
      s.pass([&](const StreamRecord& r) {
        const auto& v = graph.vertices[graph.index.at(signature_of(space, r, centers, eps))];
        for (std::size_t i = 0; i < centers.size(); ++i) {
          const double truth = space.facility_cost(r, centers[i]);
          ++weight_checks;
          if (v.weights[i] < truth / (1 + eps) * (1 - 1e-12) || v.weights[i] > truth * (1 + eps) * (1 + 1e-12)) {
            ++weight_violations;
          }
        }
      });
    }
  }
  ok = ok && weight_violations == 0;
  msg << "; weights " << weight_checks << " checked, " << weight_violations << " outside (1+-eps)";

  // r-gather within (1+eps) of offline, outliers identical to offline.
  std::size_t gather_bad = 0, outlier_bad = 0, runs = 0;
  for (double eps : {0.1, 0.5}) {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto inst = fx::random(7 + i % 6, 5, i % 2 ? 2.0 : 1.0, 3200 + i);
      const auto space = StreamSpace::from_instance(inst);
      Rng rng(i);
      const std::size_t k = 2 + i % 2;
      const CenterSet centers(bf::random_distinct(inst.num_facilities(), k, rng));
      const auto gather = ConstraintSpec::r_gather_uniform(inst.num_clients() / (k + 1));
      MemoryStream a = MemoryStream::from_instance(inst);
      const double streamed = stream_partition(a, space, centers, gather, eps).cost;
      const double offline = partition(inst, centers, gather).cost;
      gather_bad += streamed > (1 + eps) * offline * (1 + 1e-12) || a.passes() > 2;

      const auto outliers = ConstraintSpec::outlier(1 + i % 3);
      MemoryStream b = MemoryStream::from_instance(inst);
      const auto so = stream_partition(b, space, centers, outliers, eps);
      const auto oo = partition(inst, centers, outliers);
      outlier_bad += so.cost != oo.cost || !(so.clustering == oo.clustering);
      ++runs;
    }
  }
  ok = ok && gather_bad == 0 && outlier_bad == 0;
  msg << "; " << runs << " partitions: r_gather over (1+eps) " << gather_bad << ", outlier mismatches "
      << outlier_bad;

  // End to end with coupled seeds.
  std::size_t solve_bad = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = fx::random(12, 5, 1.0, 3300 + seed);
    AlgorithmParams params;
    params.eta = 4;
    params.sample_method = SampleMethod::exponential_keys;
    const double eps = seed % 2 ? 0.1 : 0.5;
    const auto gather = ConstraintSpec::r_gather_uniform(3);
    const auto outliers = ConstraintSpec::outlier(2);
    const auto off_g = solve(inst, 2, gather, params, seed);
    const auto off_o = solve(inst, 2, outliers, params, seed);
    MemoryStream a = MemoryStream::from_instance(inst);
    MemoryStream b = MemoryStream::from_instance(inst);
    const auto space = StreamSpace::from_instance(inst);
    const double sg = stream_solve(a, space, 2, gather, params, eps, seed, off_g.seeds).cost;
    const double so = stream_solve(b, space, 2, outliers, params, eps, seed, off_o.seeds).cost;
    solve_bad += sg > (1 + eps) * off_g.cost * (1 + 1e-12) || so != off_o.cost;
  }
  ok = ok && solve_bad == 0;
  msg << "; coupled solves off target " << solve_bad << "/10";
  return {ok, msg.str()};
}

Outcome memory_scaling() {
  AlgorithmParams params;
  params.eta = 10;
  params.repetitions = 4;
  params.sample_method = SampleMethod::exponential_keys;
  std::vector<std::size_t> peaks;
  std::vector<std::size_t> graph_vertices;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    const auto inst = fx::random(n, 10, 1.0, 4000 + n);
    const auto space = StreamSpace::from_instance(inst);
    MemoryStream s = MemoryStream::from_instance(inst);
    stream_list(s, space, 2, params, 9);
    peaks.push_back(s.meter().peak());
    MemoryStream g = MemoryStream::from_instance(inst);
    graph_vertices.push_back(build_representative_graph(g, space, CenterSet({0, 1}), 0.5).vertices.size());
  }
  const double change = std::abs(static_cast<double>(peaks.back()) - static_cast<double>(peaks.front())) /
                        static_cast<double>(peaks.front());
  std::ostringstream msg;
  msg << "stream_list peak records " << peaks[0] << " / " << peaks[1] << " / " << peaks[2]
      << " at |C| = 1e3 / 1e4 / 1e5 (change " << 100.0 * change << "%); representative-graph vertices "
      << graph_vertices[0] << " / " << graph_vertices[1] << " / " << graph_vertices[2] << " (reported only)";
  return {change < 0.05, msg.str()};
}

Outcome theory_constants_exact() {
  const auto c = theory_constants(1.0, 1, 1, 1.0);
  const bool integral = boost::multiprecision::denominator(c.beta) == 1 &&
                        boost::multiprecision::denominator(c.gamma) == 1;
  const bool ok = integral && c.beta == 6562 && c.gamma == 2187;
  std::ostringstream msg;
  msg << "beta " << c.beta.str() << ", gamma " << c.gamma.str() << ", eta " << c.eta_ceil.str();
  return {ok, msg.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 partition exactness", partition_exactness},
      {"2 psi and mcpm exactness", matching_exactness},
      {"3 approximation success rate", success_probability},
      {"4 lower-bound instance", lower_bound_regression},
      {"5 invariant suites", invariant_suites},
      {"6 streaming parity", streaming_parity},
      {"7 streaming memory scaling", memory_scaling},
      {"8 exact theory constants", theory_constants_exact},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << "  criterion " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
