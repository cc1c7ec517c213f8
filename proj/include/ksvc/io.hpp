#pragma once

// JSON instance and solution files.
//
// Instance: {"ell": 1, "mode": "matrix"|"euclidean"|"graph",
//            "clients": [ids], "facilities": [ids],
//            "matrix": [[...]] | "coords": {"id": [x, ...]} | "edges": [[u, v, w], ...],
//            "num_points": n (graph, optional), "constraint": {...}, "meta": {...}}
// Solution: {"cost": c, "centers": [facility point ids],
//            "assignment": {"client id": cluster}, "excluded": [client ids], "meta": {...}}

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ksvc/errors.hpp"
#include "ksvc/instances.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/partition.hpp"
#include "ksvc/solver.hpp"

namespace ksvc {

using Json = nlohmann::json;

struct InstanceFile {
  MetricInstance instance;
  std::optional<ConstraintSpec> constraint;
  Json meta = Json::object();
};

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key) { return base + "/" + key; }
inline std::string join_path(const std::string& base, std::size_t index) { return base + "/" + std::to_string(index); }

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw ParseError("schema error at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(join_path(path, key), "missing required field \"" + key + "\"");
  return *it;
}

inline double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

inline std::size_t as_index(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::size_t>(v.get<long long>());
  schema_error(path, "expected a nonnegative integer");
}

inline std::vector<std::size_t> as_index_list(const Json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of nonnegative integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_index(v[i], join_path(path, i)));
  return out;
}

inline std::vector<double> as_number_list(const Json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], join_path(path, i)));
  return out;
}

inline std::size_t parse_point_id(const std::string& key, const std::string& path) {
  std::size_t pos = 0;
  unsigned long long id = 0;
  try {
    id = std::stoull(key, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != key.size()) schema_error(path, "point id \"" + key + "\" is not a nonnegative integer");
  return static_cast<std::size_t>(id);
}

}  // namespace detail

inline Json to_json(const ConstraintSpec& spec) {
  Json j;
  j["kind"] = to_string(spec.kind);
  if (spec.has_bounds()) {
    if (spec.uniform) {
      j["r"] = spec.bounds.front();
    } else {
      j["r"] = spec.bounds;
    }
  }
  if (spec.kind == ConstraintKind::outlier) j["m"] = spec.outliers;
  return j;
}

/// {"kind": "r_gather", "r": [2, 2]} or {"kind": "r_capacity", "r": 3} (a
/// scalar r applies to every cluster) or {"kind": "outlier", "m": 1}.
inline ConstraintSpec constraint_from_json(const Json& j, const std::string& path = "") {
  const Json& kind = detail::field(j, "kind", path);
  if (!kind.is_string()) detail::schema_error(detail::join_path(path, "kind"), "expected a string");
  const std::string name = kind.get<std::string>();
  ConstraintSpec spec;
  if (name == "unconstrained") return spec;
  if (name == "outlier") {
    spec.kind = ConstraintKind::outlier;
    spec.outliers = detail::as_index(detail::field(j, "m", path), detail::join_path(path, "m"));
    return spec;
  }
  if (name == "r_gather") {
    spec.kind = ConstraintKind::r_gather;
  } else if (name == "r_capacity") {
    spec.kind = ConstraintKind::r_capacity;
  } else {
    detail::schema_error(detail::join_path(path, "kind"),
                         "unknown constraint kind \"" + name + "\" (expected unconstrained, r_gather, r_capacity, outlier)");
  }
  const Json& r = detail::field(j, "r", path);
  const std::string rpath = detail::join_path(path, "r");
  if (r.is_array()) {
    spec.bounds = detail::as_index_list(r, rpath);
  } else {
    spec.bounds = {detail::as_index(r, rpath)};
    spec.uniform = true;
  }
  if (j.contains("uniform") && j["uniform"].is_boolean() && j["uniform"].get<bool>()) {
    if (spec.bounds.empty()) detail::schema_error(rpath, "uniform bound needs a value");
    spec.bounds.resize(1);
    spec.uniform = true;
  }
  return spec;
}

inline ConstraintSpec parse_constraint(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("constraint: parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return constraint_from_json(j, "/constraint");
}

/// Builds an instance from its JSON form. Matrix metrics are checked for the
/// metric axioms when `validate` is set (and the matrix is at most kValidateLimit wide).
inline InstanceFile instance_from_json(const Json& j, bool validate = true) {
  using namespace detail;
  if (!j.is_object()) schema_error("", "expected a JSON object");
  const double ell = as_number(field(j, "ell", ""), "/ell");
  const Json& mode_field = field(j, "mode", "");
  if (!mode_field.is_string()) schema_error("/mode", "expected a string");
  const std::string mode = mode_field.get<std::string>();
  auto clients = as_index_list(field(j, "clients", ""), "/clients");
  auto facilities = as_index_list(field(j, "facilities", ""), "/facilities");

  std::shared_ptr<const Metric> metric;
  try {
    if (mode == "matrix") {
      const Json& m = field(j, "matrix", "");
      if (!m.is_array()) schema_error("/matrix", "expected an array of rows");
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < m.size(); ++i) rows.push_back(as_number_list(m[i], join_path("/matrix", i)));
      metric = std::make_shared<const Metric>(Metric::from_matrix(std::move(rows), validate));
    } else if (mode == "euclidean") {
      const Json& c = field(j, "coords", "");
      std::vector<std::vector<double>> coords;
      if (c.is_array()) {
        for (std::size_t i = 0; i < c.size(); ++i) coords.push_back(as_number_list(c[i], join_path("/coords", i)));
      } else if (c.is_object()) {
        std::vector<std::optional<std::vector<double>>> slots;
        for (const auto& [key, value] : c.items()) {
          const std::size_t id = parse_point_id(key, join_path("/coords", key));
          if (id >= slots.size()) slots.resize(id + 1);
          slots[id] = as_number_list(value, join_path("/coords", key));
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (!slots[i]) schema_error("/coords", "missing coordinates for point " + std::to_string(i));
          coords.push_back(std::move(*slots[i]));
        }
      } else {
        schema_error("/coords", "expected an object keyed by point id");
      }
      metric = std::make_shared<const Metric>(Metric::from_coords(std::move(coords)));
    } else if (mode == "graph") {
      const Json& e = field(j, "edges", "");
      if (!e.is_array()) schema_error("/edges", "expected an array of [u, v, w] triples");
      std::vector<WeightedEdge> edges;
      std::size_t n = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        const std::string p = join_path("/edges", i);
        if (!e[i].is_array() || e[i].size() != 3) schema_error(p, "expected [u, v, w]");
        WeightedEdge edge{as_index(e[i][0], join_path(p, 0)), as_index(e[i][1], join_path(p, 1)),
                          as_number(e[i][2], join_path(p, 2))};
        n = std::max({n, edge.u + 1, edge.v + 1});
        edges.push_back(edge);
      }
      for (std::size_t id : clients) n = std::max(n, id + 1);
      for (std::size_t id : facilities) n = std::max(n, id + 1);
      if (j.contains("num_points")) n = std::max(n, as_index(j["num_points"], "/num_points"));
      metric = std::make_shared<const Metric>(Metric::from_graph(n, std::move(edges)));
    } else {
      schema_error("/mode", "unknown mode \"" + mode + "\" (expected matrix, euclidean, graph)");
    }
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid metric: ") + e.what());
  }

  InstanceFile file{MetricInstance(metric, std::move(clients), std::move(facilities), ell), std::nullopt,
                    Json::object()};
  if (j.contains("constraint") && !j["constraint"].is_null()) {
    file.constraint = constraint_from_json(j["constraint"], "/constraint");
  }
  if (j.contains("meta")) file.meta = j["meta"];
  return file;
}

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(source + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open file for writing");
  out << text;
  if (!out) throw Error(path + ": write failed");
}

inline InstanceFile load_instance(const std::string& path, bool validate = true) {
  try {
    return instance_from_json(parse_json_text(read_text_file(path), path), validate);
  } catch (const ParseError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ParseError(path + ": " + what);
  }
}

inline Json instance_to_json(const MetricInstance& instance, const std::optional<ConstraintSpec>& constraint = {},
                             const Json& meta = Json::object()) {
  Json j;
  const double ell = instance.ell();
  if (ell == std::floor(ell) && ell < 1e9) {
    j["ell"] = static_cast<long long>(ell);
  } else {
    j["ell"] = ell;
  }
  const Metric& metric = instance.metric();
  j["mode"] = to_string(metric.mode());
  j["clients"] = instance.clients();
  j["facilities"] = instance.facilities();
  switch (metric.mode()) {
    case MetricMode::matrix: {
      Json rows = Json::array();
      for (std::size_t a = 0; a < metric.size(); ++a) rows.push_back(metric.row(a));
      j["matrix"] = std::move(rows);
      break;
    }
    case MetricMode::euclidean: {
      Json coords = Json::object();
      for (std::size_t p = 0; p < metric.size(); ++p) coords[std::to_string(p)] = metric.coords()[p];
      j["coords"] = std::move(coords);
      break;
    }
    case MetricMode::graph: {
      Json edges = Json::array();
      for (const auto& e : metric.edges()) edges.push_back(Json::array({e.u, e.v, e.weight}));
      j["edges"] = std::move(edges);
      j["num_points"] = metric.size();
      break;
    }
  }
  if (constraint) j["constraint"] = to_json(*constraint);
  if (!meta.is_null() && !meta.empty()) j["meta"] = meta;
  return j;
}

inline void save_instance(const std::string& path, const MetricInstance& instance,
                          const std::optional<ConstraintSpec>& constraint = {}, const Json& meta = Json::object()) {
  write_text_file(path, instance_to_json(instance, constraint, meta).dump(2) + "\n");
}

/// Solution JSON: centers as facility point ids, the assignment keyed by client point id.
inline Json clustering_to_json(const MetricInstance& instance, const CenterSet& centers, const Clustering& clustering,
                               double cost, const Json& meta = Json::object()) {
  Json j;
  j["cost"] = cost;
  Json center_ids = Json::array();
  for (std::size_t f : centers) center_ids.push_back(instance.facility_point(f));
  j["centers"] = std::move(center_ids);
  Json assignment = Json::object();
  Json excluded = Json::array();
  for (std::size_t x = 0; x < clustering.num_clients(); ++x) {
    if (clustering.is_excluded(x)) {
      excluded.push_back(instance.client_point(x));
    } else {
      assignment[std::to_string(instance.client_point(x))] = clustering.label(x);
    }
  }
  j["assignment"] = std::move(assignment);
  j["excluded"] = std::move(excluded);
  j["meta"] = meta.is_null() ? Json::object() : meta;
  return j;
}

inline Json solution_to_json(const MetricInstance& instance, const Solution& solution, Json meta = Json::object()) {
  meta["repetition"] = solution.provenance.repetition;
  meta["candidate_index"] = solution.provenance.index;
  meta["seed"] = solution.provenance.seed;
  meta["candidates_evaluated"] = solution.candidates_evaluated;
  meta["eta"] = solution.resolved.eta;
  meta["repetitions"] = solution.resolved.repetitions;
  return clustering_to_json(instance, solution.centers, solution.clustering, solution.cost, meta);
}

struct SolutionFile {
  double cost = 0.0;
  std::vector<std::size_t> centers;  // point ids
  std::vector<std::pair<std::size_t, std::size_t>> assignment;  // (client point id, cluster)
  std::vector<std::size_t> excluded;
  Json meta = Json::object();
};

inline SolutionFile solution_from_json(const Json& j) {
  using namespace detail;
  SolutionFile out;
  out.cost = as_number(field(j, "cost", ""), "/cost");
  out.centers = as_index_list(field(j, "centers", ""), "/centers");
  const Json& a = field(j, "assignment", "");
  if (!a.is_object()) schema_error("/assignment", "expected an object keyed by client id");
  for (const auto& [key, value] : a.items()) {
    const std::string p = join_path("/assignment", key);
    out.assignment.emplace_back(parse_point_id(key, p), as_index(value, p));
  }
  std::sort(out.assignment.begin(), out.assignment.end());
  if (j.contains("excluded")) out.excluded = as_index_list(j["excluded"], "/excluded");
  if (j.contains("meta")) out.meta = j["meta"];
  return out;
}

inline Json to_json(const BadInstanceParams& p) {
  return Json{{"k", p.k}, {"s", p.cluster_size}, {"delta", p.delta}, {"big_delta", p.resolved_big_delta()}, {"ell", p.ell}};
}

/// {"k": 2, "s": 3, "delta": 0.1, "big_delta": 60, "ell": 1}; big_delta is optional.
inline BadInstanceParams bad_params_from_json(const Json& j, const std::string& path = "/params") {
  using namespace detail;
  if (!j.is_object()) schema_error(path, "expected an object");
  BadInstanceParams p;
  p.k = as_index(field(j, "k", path), join_path(path, "k"));
  p.cluster_size = as_index(field(j, "s", path), join_path(path, "s"));
  p.delta = as_number(field(j, "delta", path), join_path(path, "delta"));
  if (j.contains("big_delta")) p.big_delta = as_number(j["big_delta"], join_path(path, "big_delta"));
  if (j.contains("ell")) p.ell = as_number(j["ell"], join_path(path, "ell"));
  return p;
}

inline Json to_json(const RandomParams& p) {
  return Json{{"n_clients", p.n_clients}, {"n_facilities", p.n_facilities}, {"mode", to_string(p.mode)},
              {"spread", p.spread}, {"dim", p.dim}, {"ell", p.ell}, {"clients_in_facilities", p.clients_in_facilities}};
}

/// Every field is optional and defaults to RandomParams.
inline RandomParams random_params_from_json(const Json& j, const std::string& path = "/params") {
  using namespace detail;
  if (!j.is_object()) schema_error(path, "expected an object");
  RandomParams p;
  if (j.contains("n_clients")) p.n_clients = as_index(j["n_clients"], join_path(path, "n_clients"));
  if (j.contains("n_facilities")) p.n_facilities = as_index(j["n_facilities"], join_path(path, "n_facilities"));
  if (j.contains("mode")) {
    const std::string mode = j["mode"].is_string() ? j["mode"].get<std::string>() : "";
    if (mode == "euclidean") {
      p.mode = MetricMode::euclidean;
    } else if (mode == "matrix") {
      p.mode = MetricMode::matrix;
    } else {
      schema_error(join_path(path, "mode"), "expected \"euclidean\" or \"matrix\"");
    }
  }
  if (j.contains("spread")) p.spread = as_number(j["spread"], join_path(path, "spread"));
  if (j.contains("dim")) p.dim = as_index(j["dim"], join_path(path, "dim"));
  if (j.contains("ell")) p.ell = as_number(j["ell"], join_path(path, "ell"));
  if (j.contains("clients_in_facilities")) {
    if (!j["clients_in_facilities"].is_boolean()) schema_error(join_path(path, "clients_in_facilities"), "expected a boolean");
    p.clients_in_facilities = j["clients_in_facilities"].get<bool>();
  }
  return p;
}

}  // namespace ksvc
