#pragma once

// Command-line front end. run() returns the process exit code: 0 on success,
// 2 for invalid arguments or input, 1 for runtime failures.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "ksvc/ksvc.hpp"

namespace ksvc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;

struct RunConfig {
  std::string instance;
  std::string stream;
  std::size_t k = 2;
  std::string constraint;
  double epsilon = 0.5;
  std::string mode = "practical";
  std::size_t eta = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 1;
  unsigned parallel = 0;
  std::string out;
  bool pretty = false;
  bool early_exit = false;
  bool emit_json = false;
  bool report_passes = false;
  std::string sample_method = "inverse_cdf";
  std::string centers;
  std::string kind = "random";
  std::string params = "{}";
  bool clients_as_centers = false;
  std::vector<std::string> verify_paths;
  std::size_t generate = 0;
  std::size_t trials = 10'000;
  std::size_t subsets = 100;
};

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("KSVC_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw DomainError(std::string("KSVC_SEED is not an unsigned integer: ") + env);
    }
  }
  return 1;
}

inline AlgorithmParams algorithm_params(const RunConfig& cfg) {
  AlgorithmParams p;
  p.epsilon = cfg.epsilon;
  p.eta = cfg.eta;
  p.repetitions = cfg.reps;
  p.mode = cfg.mode == "theory" ? ListMode::theory : ListMode::practical;
  p.sample_method = cfg.sample_method == "exponential_keys" ? SampleMethod::exponential_keys : SampleMethod::inverse_cdf;
  return p;
}

inline ConstraintSpec resolve_constraint(const RunConfig& cfg, const InstanceFile& file) {
  if (!cfg.constraint.empty()) return parse_constraint(cfg.constraint);
  return file.constraint.value_or(ConstraintSpec::unconstrained());
}

inline void emit(const RunConfig& cfg, const Json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (!cfg.out.empty()) {
    write_text_file(cfg.out, text);
  } else if (!cfg.pretty) {
    out << text;
  }
}

inline void print_assignment_table(const Json& j, std::ostream& out) {
  out << "cost     " << std::setprecision(12) << j["cost"].get<double>() << "\n";
  out << "centers  " << j["centers"].dump() << "\n";
  out << "client   cluster\n";
  for (const auto& [client, cluster] : j["assignment"].items()) {
    out << std::left << std::setw(9) << client << cluster.get<std::size_t>() << "\n";
  }
  for (const auto& z : j["excluded"]) out << std::left << std::setw(9) << z.get<std::size_t>() << "excluded\n";
}

inline int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  const Json params = parse_json_text(cfg.params, "--params");
  Json result;
  if (cfg.kind == "bad") {
    const auto p = bad_params_from_json(params);
    const auto bundle = gen_bad_instance(p);
    Json meta{{"generator", "bad"}, {"params", to_json(p)}};
    result = instance_to_json(bundle.instance, std::nullopt, meta);
  } else if (cfg.kind == "random") {
    const auto p = random_params_from_json(params);
    Rng rng = Rng::substream(cfg.seed, kGeneratorStream, 0);
    const auto instance = gen_random(p, rng);
    Json meta{{"generator", "random"}, {"params", to_json(p)}, {"seed", cfg.seed}};
    result = instance_to_json(instance, std::nullopt, meta);
  } else {
    throw DomainError("gen: --kind must be bad or random");
  }
  if (cfg.out.empty()) {
    out << result.dump(2) << "\n";
  } else {
    write_text_file(cfg.out, result.dump(2) + "\n");
    if (cfg.pretty) out << "wrote " << cfg.out << "\n";
  }
  return kExitOk;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_instance(cfg.instance);
  const auto spec = resolve_constraint(cfg, file);
  SolveOptions options;
  options.parallel = cfg.parallel;
  options.early_exit = cfg.early_exit;
  const auto solution = solve(file.instance, cfg.k, spec, algorithm_params(cfg), cfg.seed, options);
  Json meta{{"command", "solve"}, {"k", cfg.k}, {"constraint", to_json(spec)}, {"epsilon", cfg.epsilon},
            {"mode", cfg.mode}};
  const Json j = solution_to_json(file.instance, solution, meta);
  emit(cfg, j, out);
  if (cfg.pretty) print_assignment_table(j, out);
  return kExitOk;
}

inline std::vector<std::size_t> parse_id_list(const std::string& text) {
  std::vector<std::size_t> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      ids.push_back(std::stoull(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("--centers: \"" + item + "\" is not a point id");
    }
  }
  return ids;
}

inline int cmd_partition(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_instance(cfg.instance);
  const auto& inst = file.instance;
  const auto spec = resolve_constraint(cfg, file);
  std::vector<std::size_t> positions;
  for (std::size_t id : parse_id_list(cfg.centers)) {
    const auto& fac = inst.facilities();
    auto it = std::find(fac.begin(), fac.end(), id);
    if (it == fac.end()) throw DomainError("--centers: point " + std::to_string(id) + " is not a facility");
    positions.push_back(static_cast<std::size_t>(it - fac.begin()));
  }
  const CenterSet centers(positions);
  const auto result = partition(inst, centers, spec);
  Json meta{{"command", "partition"}, {"constraint", to_json(spec)}};
  if (!result.demand_assignment.empty()) meta["demand_assignment"] = result.demand_assignment;
  const Json j = clustering_to_json(inst, centers, result.clustering, result.cost, meta);
  emit(cfg, j, out);
  if (cfg.pretty) print_assignment_table(j, out);
  return kExitOk;
}

inline int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_instance(cfg.instance);
  const auto& inst = file.instance;
  const auto spec = resolve_constraint(cfg, file);
  Json j;
  if (cfg.clients_as_centers) {
    const auto best = oracle_unconstrained(inst, cfg.k, {}, true);
    const auto searched = inst.clients_as_facilities();
    j = clustering_to_json(searched, best.centers, voronoi_partition(searched, best.centers), best.cost,
                           Json{{"command", "oracle"}, {"centers_from", "clients"}});
  } else {
    const unsigned workers = cfg.parallel == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.parallel;
    const auto best = oracle_constrained(inst, cfg.k, spec, {}, workers);
    j = clustering_to_json(inst, best.centers, best.clustering, best.cost,
                           Json{{"command", "oracle"}, {"k", cfg.k}, {"constraint", to_json(spec)}});
  }
  emit(cfg, j, out);
  if (cfg.pretty) print_assignment_table(j, out);
  return kExitOk;
}

inline int cmd_list(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_instance(cfg.instance);
  const auto& inst = file.instance;
  CandidateList list = build_list(inst, cfg.k, algorithm_params(cfg), cfg.seed);
  Json candidates = Json::array();
  std::size_t count = 0;
  while (auto c = list.next()) {
    ++count;
    if (cfg.emit_json) {
      Json ids = Json::array();
      for (std::size_t f : c->centers) ids.push_back(inst.facility_point(f));
      candidates.push_back(Json{{"repetition", c->repetition}, {"index", c->index}, {"centers", ids}});
    }
  }
  Json seeds = Json::array();
  for (std::size_t s : list.seeds()) seeds.push_back(inst.client_point(s));
  const auto resolved = resolve_params(algorithm_params(cfg), cfg.k, inst.ell());
  Json j{{"k", cfg.k},           {"eta", resolved.eta},       {"repetitions", resolved.repetitions},
         {"seeds", seeds},       {"candidates_emitted", count}, {"skipped_repetitions", list.skipped_repetitions()}};
  if (cfg.emit_json) j["candidates"] = std::move(candidates);
  emit(cfg, j, out);
  if (cfg.pretty) {
    out << "eta " << resolved.eta << ", repetitions " << resolved.repetitions << ", candidates " << count << "\n";
  }
  return kExitOk;
}

inline int cmd_stream_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto file = load_instance(cfg.instance);
  const auto& inst = file.instance;
  const auto spec = resolve_constraint(cfg, file);
  const StreamSpace space = StreamSpace::from_instance(inst);
  std::unique_ptr<PointStream> stream;
  if (cfg.stream.empty()) {
    stream = std::make_unique<MemoryStream>(MemoryStream::from_instance(inst));
  } else {
    stream = std::make_unique<FileStream>(cfg.stream);
  }
  AlgorithmParams params = algorithm_params(cfg);
  params.sample_method = SampleMethod::exponential_keys;
  const auto solution = stream_solve(*stream, space, cfg.k, spec, params, cfg.epsilon, cfg.seed);

  Json j;
  j["cost"] = solution.cost;
  Json centers = Json::array();
  for (std::size_t f : solution.centers) centers.push_back(space.facility_point(f));
  j["centers"] = centers;
  Json assignment = Json::object();
  Json excluded = Json::array();
  const auto& part = solution.partition;
  for (std::size_t i = 0; i < part.ids.size(); ++i) {
    if (part.clustering.is_excluded(i)) {
      excluded.push_back(part.ids[i]);
    } else {
      assignment[std::to_string(part.ids[i])] = part.clustering.label(i);
    }
  }
  j["assignment"] = assignment;
  j["excluded"] = excluded;
  j["meta"] = Json{{"command", "stream-solve"},
                   {"k", cfg.k},
                   {"constraint", to_json(spec)},
                   {"epsilon", cfg.epsilon},
                   {"passes", solution.passes},
                   {"pass_budget", stream_solve_pass_budget(spec)},
                   {"peak_memory_records", solution.peak_memory},
                   {"candidates_evaluated", solution.candidates_evaluated},
                   {"repetition", solution.provenance.repetition},
                   {"candidate_index", solution.provenance.index},
                   {"seed", cfg.seed},
                   {"seeding", solution.seeding_note}};
  emit(cfg, j, out);
  if (cfg.pretty) print_assignment_table(j, out);
  if (cfg.report_passes) {
    err << "passes " << solution.passes << " (budget " << stream_solve_pass_budget(spec) << "), peak memory "
        << solution.peak_memory << " records\n";
  }
  return kExitOk;
}

inline void print_checks(const std::string& title, const std::vector<CheckResult>& checks, std::ostream& out) {
  out << title << "\n";
  for (const auto& c : checks) {
    out << "  " << (c.passed ? "PASS" : "FAIL") << "  " << std::left << std::setw(62) << c.name << " trials=" << c.trials
        << " violations=" << c.violations;
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << "\n";
  }
}

inline std::vector<CheckResult> verify_instance(const InstanceFile& file, const RunConfig& cfg, std::uint64_t seed,
                                                std::vector<std::string>& notes) {
  const auto& inst = file.instance;
  Rng rng(seed);
  std::vector<CheckResult> checks;
  checks.push_back(check_metric_axioms(inst, rng, cfg.trials));
  checks.push_back(check_power_triangle(inst, rng, cfg.trials));
  checks.push_back(check_nearest_facility_average(inst, rng, cfg.subsets));
  checks.push_back(check_client_average(inst, rng, cfg.subsets));
  try {
    checks.push_back(check_client_centers_bound(inst, std::min(cfg.k, inst.num_clients())));
  } catch (const BudgetError& e) {
    notes.push_back(std::string("OPT(C,C) check skipped: ") + e.what());
  }
  if (file.meta.is_object() && file.meta.value("generator", "") == "bad") {
    const auto bundle = gen_bad_instance(bad_params_from_json(file.meta.at("params"), "/meta/params"));
    CheckResult same{"instance matches its generator parameters", true, 1, 0, ""};
    const auto& a = bundle.instance;
    if (a.clients() != inst.clients() || a.facilities() != inst.facilities() || a.ell() != inst.ell()) {
      same.violations = 1;
    } else {
      for (std::size_t p : detail::universe_points(a)) {
        for (std::size_t q : detail::universe_points(a)) {
          if (!approx_eq(a.distance(p, q), inst.distance(p, q))) ++same.violations;
        }
      }
    }
    same.passed = same.violations == 0;
    checks.push_back(same);
    if (same.passed) {
      for (auto& c : check_bad_instance(bundle, algorithm_params(cfg), seed)) checks.push_back(std::move(c));
    }
  }
  return checks;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  if (cfg.verify_paths.empty() && cfg.generate == 0) throw DomainError("verify: give instance files or --generate N");
  bool all_passed = true;
  Json report = Json::array();
  auto record = [&](const std::string& title, const std::vector<CheckResult>& checks,
                    const std::vector<std::string>& notes) {
    Json entry{{"instance", title}, {"checks", Json::array()}, {"notes", notes}};
    for (const auto& c : checks) {
      all_passed = all_passed && c.passed;
      entry["checks"].push_back(Json{{"name", c.name},
                                     {"passed", c.passed},
                                     {"trials", c.trials},
                                     {"violations", c.violations},
                                     {"detail", c.detail}});
    }
    report.push_back(entry);
    if (cfg.pretty) {
      print_checks(title, checks, out);
      for (const auto& n : notes) out << "  note: " << n << "\n";
    }
  };
  for (const auto& path : cfg.verify_paths) {
    std::vector<std::string> notes;
    const auto file = load_instance(path);
    record(path, verify_instance(file, cfg, cfg.seed, notes), notes);
  }
  for (std::size_t g = 0; g < cfg.generate; ++g) {
    RandomParams p;
    p.n_clients = 6;
    p.n_facilities = 5;
    p.ell = g % 2 == 0 ? 1.0 : 2.0;
    p.mode = g % 3 == 0 ? MetricMode::matrix : MetricMode::euclidean;
    Rng rng = Rng::substream(cfg.seed, kGeneratorStream, g);
    const InstanceFile file{gen_random(p, rng), std::nullopt, Json::object()};
    std::vector<std::string> notes;
    record("generated #" + std::to_string(g), verify_instance(file, cfg, cfg.seed + g, notes), notes);
  }
  const Json j{{"passed", all_passed}, {"instances", report}};
  emit(cfg, j, out);
  if (cfg.pretty) out << (all_passed ? "all checks passed" : "some checks FAILED") << "\n";
  return all_passed ? kExitOk : kExitRuntime;
}

inline void add_algorithm_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--epsilon", cfg.epsilon, "Accuracy parameter in (0, 1]")->capture_default_str();
  cmd->add_option("--mode", cfg.mode, "List sizing: practical or theory")
      ->check(CLI::IsMember({"practical", "theory"}))
      ->capture_default_str();
  cmd->add_option("--eta", cfg.eta, "Samples per center per repetition (0: mode default)")->capture_default_str();
  cmd->add_option("--reps", cfg.reps, "Repetitions (0: mode default)")->capture_default_str();
  cmd->add_option("--sample-method", cfg.sample_method, "inverse_cdf or exponential_keys")
      ->check(CLI::IsMember({"inverse_cdf", "exponential_keys"}))
      ->capture_default_str();
}

inline void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "Master seed (default from KSVC_SEED, else 1)");
  cmd->add_option("--out", cfg.out, "Write JSON here instead of standard output");
  cmd->add_flag("--pretty", cfg.pretty, "Print a human-readable table");
}

inline void add_problem_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--instance", cfg.instance, "Instance JSON file")->required();
  cmd->add_option("--k", cfg.k, "Number of centers")->capture_default_str();
  cmd->add_option("--constraint", cfg.constraint,
                  "Constraint JSON, e.g. '{\"kind\":\"r_gather\",\"r\":[2,2]}' (default: the instance's, else none)");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"ksvc: constrained k-median / k-means solver"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");
  app.failure_message(CLI::FailureMessage::help);

  try {
    cfg.seed = default_seed();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  cfg.parallel = std::max(1u, std::thread::hardware_concurrency());

  auto* gen = app.add_subcommand("gen", "Generate an instance");
  gen->add_option("--kind", cfg.kind, "bad or random")->check(CLI::IsMember({"bad", "random"}))->capture_default_str();
  gen->add_option("--params", cfg.params, "Generator parameters as JSON")->capture_default_str();
  add_common_flags(gen, cfg);

  auto* solve_cmd = app.add_subcommand("solve", "Sample a candidate list and keep the best feasible solution");
  add_problem_flags(solve_cmd, cfg);
  add_algorithm_flags(solve_cmd, cfg);
  add_common_flags(solve_cmd, cfg);
  solve_cmd->add_option("--parallel", cfg.parallel, "Worker threads (default: available cores)");
  solve_cmd->add_flag("--early-exit", cfg.early_exit, "Stop at the first zero-cost candidate");

  auto* part = app.add_subcommand("partition", "Cheapest feasible clustering for fixed centers");
  add_problem_flags(part, cfg);
  part->add_option("--centers", cfg.centers, "Comma-separated facility point ids")->required();
  add_common_flags(part, cfg);

  auto* oracle = app.add_subcommand("oracle", "Exact optimum of a tiny instance by exhaustive search");
  add_problem_flags(oracle, cfg);
  add_algorithm_flags(oracle, cfg);
  add_common_flags(oracle, cfg);
  oracle->add_option("--parallel", cfg.parallel, "Worker threads (default: available cores)");
  oracle->add_flag("--clients-as-centers", cfg.clients_as_centers, "Unconstrained optimum with centers drawn from C");

  auto* list = app.add_subcommand("list", "Emit the candidate center sets");
  list->add_option("--instance", cfg.instance, "Instance JSON file")->required();
  list->add_option("--k", cfg.k, "Number of centers")->capture_default_str();
  add_algorithm_flags(list, cfg);
  add_common_flags(list, cfg);
  list->add_flag("--emit-json", cfg.emit_json, "Include every candidate in the output");

  auto* stream = app.add_subcommand("stream-solve", "Multi-pass streaming solve");
  add_problem_flags(stream, cfg);
  add_algorithm_flags(stream, cfg);
  add_common_flags(stream, cfg);
  stream->add_option("--stream", cfg.stream, "Client record file, one `id v1 v2 ...` per line (default: the instance's clients)");
  stream->add_flag("--report-passes", cfg.report_passes, "Print pass count and peak memory on standard error");

  auto* verify = app.add_subcommand("verify", "Run the invariant checks and print a pass/fail table");
  verify->add_option("instances", cfg.verify_paths, "Instance JSON files");
  verify->add_option("--generate", cfg.generate, "Also check this many generated random instances");
  verify->add_option("--k", cfg.k, "k for the OPT(C,C) check")->capture_default_str();
  verify->add_option("--trials", cfg.trials, "Random tuples per inequality check")->capture_default_str();
  verify->add_option("--subsets", cfg.subsets, "Random subsets per averaging check")->capture_default_str();
  add_algorithm_flags(verify, cfg);
  add_common_flags(verify, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*gen) return cmd_gen(cfg, out);
    if (*solve_cmd) return cmd_solve(cfg, out);
    if (*part) return cmd_partition(cfg, out);
    if (*oracle) return cmd_oracle(cfg, out);
    if (*list) return cmd_list(cfg, out);
    if (*stream) return cmd_stream_solve(cfg, out, err);
    if (*verify) return cmd_verify(cfg, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace ksvc::cli
