#pragma once

// Multi-pass streaming: clients arrive as a replayable stream of records while
// the facility list stays in memory. Every traversal is counted, and the
// number of records held at any time is metered.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ksvc/errors.hpp"
#include "ksvc/list_builder.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/partition.hpp"
#include "ksvc/rng.hpp"
#include "ksvc/sampling.hpp"
#include "ksvc/solver.hpp"

namespace ksvc {

/// One client: an id plus either coordinates or a row of distances to every
/// point id of the universe.
struct StreamRecord {
  std::size_t id = 0;
  std::vector<double> payload;
};

/// Counts records held by streaming algorithms; peak is the high-water mark.
class MemoryMeter {
 public:
  void add(std::size_t n) {
    current_ += n;
    peak_ = std::max(peak_, current_);
  }
  void remove(std::size_t n) { current_ -= std::min(n, current_); }
  void reset() { current_ = peak_ = 0; }
  std::size_t current() const { return current_; }
  std::size_t peak() const { return peak_; }

 private:
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
};

/// A replayable record source. Algorithms see records only through pass().
class PointStream {
 public:
  virtual ~PointStream() = default;

  /// One full traversal in the fixed record order.
  void pass(const std::function<void(const StreamRecord&)>& visit) {
    ++passes_;
    replay(visit);
  }

  std::size_t passes() const { return passes_; }
  void reset_passes() { passes_ = 0; }
  MemoryMeter& meter() { return meter_; }
  const MemoryMeter& meter() const { return meter_; }

 protected:
  virtual void replay(const std::function<void(const StreamRecord&)>& visit) = 0;

 private:
  std::size_t passes_ = 0;
  MemoryMeter meter_;
};

class MemoryStream : public PointStream {
 public:
  explicit MemoryStream(std::vector<StreamRecord> records) : records_(std::move(records)) {}

  /// Records for the clients of an instance, in client order, keyed by client point id.
  static MemoryStream from_instance(const MetricInstance& instance) {
    std::vector<StreamRecord> records;
    records.reserve(instance.num_clients());
    const Metric& metric = instance.metric();
    for (std::size_t p : instance.clients()) {
      if (metric.mode() == MetricMode::euclidean) {
        records.push_back({p, metric.coords()[p]});
      } else {
        records.push_back({p, metric.row(p)});
      }
    }
    return MemoryStream(std::move(records));
  }

  std::size_t size() const { return records_.size(); }

 protected:
  void replay(const std::function<void(const StreamRecord&)>& visit) override {
    for (const auto& r : records_) visit(r);
  }

 private:
  std::vector<StreamRecord> records_;
};

/// Whitespace-separated text records, one per line: `id v1 v2 ...`. Blank
/// lines and lines starting with '#' are skipped. The file is re-read on
/// every pass.
class FileStream : public PointStream {
 public:
  explicit FileStream(std::string path) : path_(std::move(path)) {
    std::ifstream probe(path_);
    if (!probe) throw ParseError(path_ + ": cannot open stream file");
  }

  /// Writes the clients of an instance in the format read by FileStream.
  static void write(const std::string& path, const MetricInstance& instance) {
    std::ofstream out(path);
    if (!out) throw Error(path + ": cannot open file for writing");
    out.precision(17);
    MemoryStream stream = MemoryStream::from_instance(instance);
    stream.pass([&](const StreamRecord& r) {
      out << r.id;
      for (double v : r.payload) out << ' ' << v;
      out << '\n';
    });
  }

 protected:
  void replay(const std::function<void(const StreamRecord&)>& visit) override {
    std::ifstream in(path_);
    if (!in) throw ParseError(path_ + ": cannot open stream file");
    std::string line;
    std::size_t line_no = 0;
    StreamRecord record;
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream fields(line);
      long long id = -1;
      if (!(fields >> id) || id < 0) {
        throw ParseError(path_ + ":" + std::to_string(line_no) + ": expected a nonnegative integer record id");
      }
      record.id = static_cast<std::size_t>(id);
      record.payload.clear();
      std::string token;
      while (fields >> token) {
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
          throw ParseError(path_ + ":" + std::to_string(line_no) + ": bad number \"" + token + "\"");
        }
        record.payload.push_back(v);
      }
      visit(record);
    }
  }

 private:
  std::string path_;
};

/// How stream records relate to each other and to the resident facilities.
class StreamSpace {
 public:
  enum class Payload { coords, row };

  /// Euclidean instances stream coordinates; matrix and graph instances stream
  /// rows of the distance matrix.
  static StreamSpace from_instance(const MetricInstance& instance) {
    StreamSpace space;
    space.ell_ = instance.ell();
    space.facility_points_ = instance.facilities();
    if (instance.metric().mode() == MetricMode::euclidean) {
      space.payload_ = Payload::coords;
      for (std::size_t p : instance.facilities()) space.facility_coords_.push_back(instance.metric().coords()[p]);
    } else {
      space.payload_ = Payload::row;
    }
    return space;
  }

  Payload payload() const { return payload_; }
  double ell() const { return ell_; }
  std::size_t num_facilities() const { return facility_points_.size(); }
  std::size_t facility_point(std::size_t j) const { return facility_points_[j]; }

  double distance(const StreamRecord& a, const StreamRecord& b) const {
    if (payload_ == Payload::coords) return euclid(a.payload, b.payload);
    return at(a, b.id);
  }

  double facility_distance(const StreamRecord& r, std::size_t facility) const {
    if (payload_ == Payload::coords) return euclid(r.payload, facility_coords_[facility]);
    return at(r, facility_points_[facility]);
  }

  double facility_cost(const StreamRecord& r, std::size_t facility) const {
    return pow_ell(facility_distance(r, facility), ell_);
  }

  /// The k facilities nearest to a record, ordered by (distance, index).
  std::vector<std::size_t> k_nearest(const StreamRecord& r, std::size_t k) const {
    const std::size_t m = num_facilities();
    std::vector<std::pair<double, std::size_t>> order(m);
    for (std::size_t j = 0; j < m; ++j) order[j] = {facility_distance(r, j), j};
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = order[i].second;
    return out;
  }

  /// In-memory instance over a handful of records (used for seeding on a sample).
  MetricInstance sample_instance(const std::vector<StreamRecord>& records) const {
    std::shared_ptr<const Metric> metric;
    if (payload_ == Payload::coords) {
      std::vector<std::vector<double>> coords;
      for (const auto& r : records) coords.push_back(r.payload);
      metric = std::make_shared<const Metric>(Metric::from_coords(std::move(coords)));
    } else {
      std::vector<std::vector<double>> rows(records.size(), std::vector<double>(records.size()));
      for (std::size_t a = 0; a < records.size(); ++a) {
        for (std::size_t b = 0; b < records.size(); ++b) rows[a][b] = at(records[a], records[b].id);
      }
      metric = std::make_shared<const Metric>(Metric::from_matrix(std::move(rows), false));
    }
    std::vector<std::size_t> ids(records.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return MetricInstance(metric, ids, ids, ell_);
  }

 private:
  static double euclid(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw DomainError("stream: coordinate dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double diff = p[i] - q[i];
      sum += diff * diff;
    }
    return std::sqrt(sum);
  }

  static double at(const StreamRecord& r, std::size_t point) {
    if (point >= r.payload.size()) {
      throw DomainError("stream: record " + std::to_string(r.id) + " has no distance to point " + std::to_string(point));
    }
    return r.payload[point];
  }

  Payload payload_ = Payload::coords;
  double ell_ = 1.0;
  std::vector<std::size_t> facility_points_;
  std::vector<std::vector<double>> facility_coords_;
};

namespace detail {

inline void check_pass_budget(const PointStream& stream, std::size_t start, std::size_t budget, const char* who) {
  if (stream.passes() - start > budget) {
    throw std::logic_error(std::string(who) + ": used " + std::to_string(stream.passes() - start) +
                           " passes, budget is " + std::to_string(budget));
  }
}

}  // namespace detail

struct StreamList {
  CandidateList list;
  std::vector<std::size_t> seed_ids;              // record ids of the seeds
  std::vector<std::vector<std::size_t>> samples;  // per repetition: sampled record ids, then the seeds
  std::vector<std::vector<std::size_t>> pools;    // per repetition: sorted facility indices
  std::size_t seeding_sample = 0;                 // records kept by the first pass
  std::string seeding_note;
};

/// Size of the first-pass uniform sample used for seeding.
inline std::size_t seeding_sample_capacity(const ResolvedParams& resolved, std::size_t k) {
  return std::max(resolved.eta * k, resolved.seed_count);
}

/// Three-pass candidate list.
///
/// Pass 1 keeps a uniform reservoir sample and seeds on it with k-means++.
/// Pass 2 runs eta*k single-slot exponential-key reservoirs per repetition
/// against the seeds; slot j of repetition r draws from substream (seed, r, j)
/// exactly like the offline exponential-key sampler. Pass 3 collects the k
/// nearest facilities of every sampled or seed record. When `seed_ids` is
/// given, pass 1 only fetches those records.
inline StreamList stream_list(PointStream& stream, const StreamSpace& space, std::size_t k,
                              const AlgorithmParams& params, std::uint64_t seed,
                              std::optional<std::vector<std::size_t>> seed_ids = std::nullopt) {
  const std::size_t start = stream.passes();
  if (k == 0) throw DomainError("stream list: k must be positive");
  if (k > space.num_facilities()) throw InfeasibleError("stream list: k exceeds |L|");
  const ResolvedParams resolved = resolve_params(params, k, space.ell());
  MemoryMeter& meter = stream.meter();

  // Pass 1: seeding.
  std::vector<StreamRecord> seeds;
  std::size_t seeding_sample = 0;
  std::size_t n = 0;
  std::string note;
  if (seed_ids) {
    std::map<std::size_t, std::size_t> wanted;
    for (std::size_t i = 0; i < seed_ids->size(); ++i) wanted.emplace((*seed_ids)[i], i);
    std::vector<std::optional<StreamRecord>> found(seed_ids->size());
    stream.pass([&](const StreamRecord& r) {
      ++n;
      auto it = wanted.find(r.id);
      if (it != wanted.end() && !found[it->second]) {
        found[it->second] = r;
        meter.add(1);
      }
    });
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (!found[i]) throw DomainError("stream list: seed record " + std::to_string((*seed_ids)[i]) + " not in stream");
      seeds.push_back(std::move(*found[i]));
    }
    note = "seeds supplied by the caller";
  } else {
    const std::size_t capacity = seeding_sample_capacity(resolved, k);
    std::vector<StreamRecord> reservoir;
    Rng rng = Rng::substream(seed, kSeedingStream, 1);
    stream.pass([&](const StreamRecord& r) {
      ++n;
      if (reservoir.size() < capacity) {
        reservoir.push_back(r);
        meter.add(1);
      } else {
        const std::uint64_t slot = rng.index(n);
        if (slot < capacity) reservoir[slot] = r;
      }
    });
    if (n == 0) throw DomainError("stream list: empty stream");
    seeding_sample = reservoir.size();
    const std::size_t count = std::min(resolved.seed_count, reservoir.size());
    Rng seeding = Rng::substream(seed, kSeedingStream, 0);
    const auto picked = seed_kmeanspp(space.sample_instance(reservoir), count, seeding).centers;
    for (std::size_t i : picked) seeds.push_back(reservoir[i]);
    meter.add(seeds.size());
    meter.remove(reservoir.size());
    note = "uniform reservoir of " + std::to_string(seeding_sample) + " records, then k-means++ on the sample";
  }
  if (k > n) throw InfeasibleError("stream list: k exceeds the number of stream records");

  // Pass 2: D^ell samples for every repetition at once.
  const std::size_t per_rep = resolved.eta * k;
  const std::size_t slots = per_rep * resolved.repetitions;
  std::vector<Rng> slot_rng;
  std::vector<WeightedReservoir> slot_state(slots);
  slot_rng.reserve(slots);
  for (std::size_t r = 0; r < resolved.repetitions; ++r) {
    for (std::size_t j = 0; j < per_rep; ++j) slot_rng.push_back(Rng::substream(seed, r, j));
  }
  meter.add(slots);
  stream.pass([&](const StreamRecord& r) {
    double weight = std::numeric_limits<double>::infinity();
    for (const auto& s : seeds) weight = std::min(weight, pow_ell(space.distance(s, r), space.ell()));
    for (std::size_t i = 0; i < slots; ++i) slot_state[i].offer(r.id, weight, slot_rng[i]);
  });

  StreamList out{CandidateList(k, 0, {}, {}), {}, {}, {}, seeding_sample, note};
  for (const auto& s : seeds) out.seed_ids.push_back(s.id);
  out.samples.resize(resolved.repetitions);
  for (std::size_t r = 0; r < resolved.repetitions; ++r) {
    for (std::size_t j = 0; j < per_rep; ++j) out.samples[r].push_back(*slot_state[r * per_rep + j].selected());
    out.samples[r].insert(out.samples[r].end(), out.seed_ids.begin(), out.seed_ids.end());
  }

  // Pass 3: k nearest facilities of every sample slot and seed.
  std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> wanted;  // id -> (repetition, slot)
  std::vector<std::vector<std::vector<std::size_t>>> nearest(resolved.repetitions);
  for (std::size_t r = 0; r < resolved.repetitions; ++r) {
    nearest[r].resize(out.samples[r].size());
    for (std::size_t j = 0; j < out.samples[r].size(); ++j) wanted[out.samples[r][j]].emplace_back(r, j);
  }
  stream.pass([&](const StreamRecord& r) {
    auto it = wanted.find(r.id);
    if (it == wanted.end() || nearest[it->second.front().first][it->second.front().second].size() == k) return;
    const auto near = space.k_nearest(r, k);
    for (const auto& [rep, slot] : it->second) nearest[rep][slot] = near;
    meter.add(it->second.size() * k);
  });
  std::size_t held = 0;
  for (const auto& rep : nearest) {
    std::vector<std::size_t> pool;
    for (const auto& near : rep) {
      pool.insert(pool.end(), near.begin(), near.end());
      held += near.size();
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    out.pools.push_back(std::move(pool));
  }
  meter.remove(held);
  meter.remove(slots);
  meter.remove(seeds.size());

  auto samples = out.samples;
  auto pools = out.pools;
  auto source = [samples, pools](std::size_t r) { return Repetition{r, samples[r], pools[r]}; };
  out.list = CandidateList(k, resolved.repetitions, source, out.seed_ids, params.dedup);
  detail::check_pass_budget(stream, start, 3, "stream_list");
  return out;
}

/// Distance signature of a client with respect to a center set: one bucket
/// floor(log_{1+eps} d^ell) per center, kZeroBucket for zero cost.
inline constexpr std::int64_t kZeroBucket = std::numeric_limits<std::int64_t>::min();

struct RepresentativeVertex {
  std::vector<std::int64_t> signature;
  std::int64_t count = 0;
  std::vector<double> weights;  // stored d^ell to each center
};

struct RepresentativeGraph {
  std::size_t num_centers = 0;
  double epsilon = 0.0;
  std::vector<RepresentativeVertex> vertices;
  std::map<std::vector<std::int64_t>, std::size_t> index;

  std::int64_t total_count() const {
    std::int64_t total = 0;
    for (const auto& v : vertices) total += v.count;
    return total;
  }
};

inline std::int64_t cost_bucket(double cost, double epsilon) {
  if (cost <= 0.0) return kZeroBucket;
  return static_cast<std::int64_t>(std::floor(std::log(cost) / std::log1p(epsilon)));
}

/// Geometric midpoint of a bucket: within a factor (1+eps)^(1/2) of every cost in it.
inline double bucket_weight(std::int64_t bucket, double epsilon) {
  if (bucket == kZeroBucket) return 0.0;
  return std::exp((static_cast<double>(bucket) + 0.5) * std::log1p(epsilon));
}

inline std::vector<std::int64_t> signature_of(const StreamSpace& space, const StreamRecord& r,
                                              const CenterSet& centers, double epsilon) {
  std::vector<std::int64_t> sig(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) sig[i] = cost_bucket(space.facility_cost(r, centers[i]), epsilon);
  return sig;
}

namespace detail {

inline void add_to_graph(RepresentativeGraph& graph, std::vector<std::int64_t> sig, MemoryMeter& meter) {
  auto [it, inserted] = graph.index.emplace(sig, graph.vertices.size());
  if (inserted) {
    RepresentativeVertex v;
    v.weights.reserve(sig.size());
    for (std::int64_t b : sig) v.weights.push_back(bucket_weight(b, graph.epsilon));
    v.signature = std::move(sig);
    graph.vertices.push_back(std::move(v));
    meter.add(1);
  }
  ++graph.vertices[it->second].count;
}

inline void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("representative graph: epsilon must lie in (0, 1)");
}

}  // namespace detail

/// One pass: group clients by distance signature.
inline RepresentativeGraph build_representative_graph(PointStream& stream, const StreamSpace& space,
                                                      const CenterSet& centers, double epsilon) {
  detail::check_epsilon(epsilon);
  RepresentativeGraph graph;
  graph.num_centers = centers.size();
  graph.epsilon = epsilon;
  stream.pass([&](const StreamRecord& r) {
    detail::add_to_graph(graph, signature_of(space, r, centers, epsilon), stream.meter());
  });
  return graph;
}

struct GraphAssignment {
  std::vector<std::vector<std::int64_t>> counts;  // counts[i][v]
  double cost = 0.0;                              // in stored weights
  std::vector<std::size_t> demand_assignment;
};

/// Size-constrained assignment on the compressed graph, each vertex carrying
/// n_v unit clients.
inline GraphAssignment solve_on_graph(const RepresentativeGraph& graph, const ConstraintSpec& spec) {
  const std::size_t k = graph.num_centers;
  const std::size_t groups = graph.vertices.size();
  const auto n = graph.total_count();
  std::vector<std::vector<double>> cost(k, std::vector<double>(groups));
  std::vector<std::int64_t> multiplicity(groups);
  for (std::size_t v = 0; v < groups; ++v) {
    multiplicity[v] = graph.vertices[v].count;
    for (std::size_t i = 0; i < k; ++i) cost[i][v] = graph.vertices[v].weights[i];
  }
  const bool lower_bounds = spec.kind == ConstraintKind::r_gather;
  auto solve = [&](const std::vector<std::size_t>& r) {
    std::vector<std::int64_t> lower(k), upper(k);
    for (std::size_t i = 0; i < k; ++i) {
      lower[i] = lower_bounds ? static_cast<std::int64_t>(r[i]) : 0;
      upper[i] = lower_bounds ? n : static_cast<std::int64_t>(r[i]);
    }
    return detail::assign_with_bounds(cost, multiplicity, lower, upper);
  };
  auto [best, demand] = detail::best_over_demands(spec.bounds_for(k), solve);
  return {std::move(best.counts), best.cost, std::move(demand)};
}

struct StreamPartition {
  std::vector<std::size_t> ids;     // record ids in stream order
  Clustering clustering{0, {}};     // labels in stream order
  double cost = 0.0;                // true cost of the realized clustering
  double graph_cost = 0.0;          // optimum on the compressed graph (flow kinds)
  std::vector<std::size_t> demand_assignment;
  std::size_t graph_vertices = 0;
};

namespace detail {

// Realization pass: each record takes the first center with flow left for its signature.
inline StreamPartition realize(PointStream& stream, const StreamSpace& space, const CenterSet& centers,
                               const RepresentativeGraph& graph, std::vector<std::vector<std::int64_t>> remaining) {
  StreamPartition out;
  std::vector<std::size_t> labels;
  stream.pass([&](const StreamRecord& r) {
    const auto v = graph.index.at(signature_of(space, r, centers, graph.epsilon));
    std::size_t i = 0;
    while (i < centers.size() && remaining[i][v] == 0) ++i;
    if (i == centers.size()) throw std::logic_error("stream partition: flow counts exhausted for a signature");
    --remaining[i][v];
    out.ids.push_back(r.id);
    labels.push_back(i);
    out.cost += space.facility_cost(r, centers[i]);
  });
  out.clustering = Clustering(centers.size(), std::move(labels));
  return out;
}

// Per-record nearest center (ties to the smaller position) and its cost.
inline std::pair<std::size_t, double> nearest_in_stream(const StreamSpace& space, const StreamRecord& r,
                                                       const CenterSet& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double d = space.facility_distance(r, centers[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return {best, pow_ell(best_d, space.ell())};
}

// The m largest (cost, position) keys, smallest on top.
class FarthestTracker {
 public:
  explicit FarthestTracker(std::size_t m) : m_(m) {}

  void offer(double cost, std::size_t position) {
    if (m_ == 0) return;
    const Key key{cost, position};
    if (heap_.size() < m_) {
      heap_.push(key);
    } else if (heap_.top() < key) {
      heap_.pop();
      heap_.push(key);
    }
  }

  std::size_t size() const { return heap_.size(); }

  std::vector<std::pair<double, std::size_t>> items() const {
    auto copy = heap_;
    std::vector<std::pair<double, std::size_t>> out;
    while (!copy.empty()) {
      out.push_back(copy.top());
      copy.pop();
    }
    return out;
  }

 private:
  using Key = std::pair<double, std::size_t>;
  std::size_t m_;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap_;
};

// Labels pass: Voronoi for every record whose position is not dropped.
inline StreamPartition assign_pass(PointStream& stream, const StreamSpace& space, const CenterSet& centers,
                                   const std::vector<std::size_t>& dropped_positions) {
  StreamPartition out;
  std::vector<std::size_t> labels;
  std::size_t position = 0;
  stream.pass([&](const StreamRecord& r) {
    out.ids.push_back(r.id);
    if (std::binary_search(dropped_positions.begin(), dropped_positions.end(), position++)) {
      labels.push_back(Clustering::excluded);
      return;
    }
    const auto [label, cost] = nearest_in_stream(space, r, centers);
    labels.push_back(label);
    out.cost += cost;
  });
  out.clustering = Clustering(centers.size(), std::move(labels));
  return out;
}

}  // namespace detail

/// Streaming partition. Size constraints: one pass builds the compressed
/// graph, the flow runs on it, one pass realizes the flow (cost within
/// (1+eps) of the exact partition). Outliers: one pass tracks the m farthest
/// clients, one pass assigns the rest (exact).
inline StreamPartition stream_partition(PointStream& stream, const StreamSpace& space, const CenterSet& centers,
                                        const ConstraintSpec& spec, double epsilon) {
  const std::size_t start = stream.passes();
  if (centers.empty()) throw DomainError("stream partition: empty center set");
  for (std::size_t f : centers) {
    if (f >= space.num_facilities()) throw DomainError("stream partition: facility index out of range");
  }
  if (spec.has_bounds()) {
    auto graph = build_representative_graph(stream, space, centers, epsilon);
    spec.check_feasible(static_cast<std::size_t>(graph.total_count()), centers.size());
    auto assignment = solve_on_graph(graph, spec);
    auto out = detail::realize(stream, space, centers, graph, assignment.counts);
    out.graph_cost = assignment.cost;
    out.demand_assignment = std::move(assignment.demand_assignment);
    out.graph_vertices = graph.vertices.size();
    stream.meter().remove(graph.vertices.size());
    detail::check_pass_budget(stream, start, 2, "stream_partition");
    return out;
  }
  const std::size_t m = spec.excluded_count();
  std::vector<std::size_t> dropped;
  if (m > 0) {
    detail::FarthestTracker tracker(m);
    std::size_t position = 0;
    stream.pass([&](const StreamRecord& r) { tracker.offer(detail::nearest_in_stream(space, r, centers).second, position++); });
    spec.check_feasible(position, centers.size());
    stream.meter().add(tracker.size());
    for (const auto& item : tracker.items()) dropped.push_back(item.second);
    std::sort(dropped.begin(), dropped.end());
  }
  auto out = detail::assign_pass(stream, space, centers, dropped);
  stream.meter().remove(dropped.size());
  detail::check_pass_budget(stream, start, 2, "stream_partition");
  return out;
}

struct StreamSolution {
  CenterSet centers;
  StreamPartition partition;
  double cost = 0.0;
  Provenance provenance;
  std::size_t candidates_evaluated = 0;
  std::size_t passes = 0;
  std::size_t peak_memory = 0;
  std::vector<std::size_t> seed_ids;
  std::string seeding_note;
};

/// Pass budget of stream_solve: 3 list passes, then for size constraints one
/// graph-building pass, one costing pass and one labeling pass; otherwise one
/// costing pass and one labeling pass.
inline std::size_t stream_solve_pass_budget(const ConstraintSpec& spec) { return spec.has_bounds() ? 6 : 5; }

/// Streaming end-to-end solve. All candidates go through each pass together,
/// so the pass count does not depend on the list length.
inline StreamSolution stream_solve(PointStream& stream, const StreamSpace& space, std::size_t k,
                                   const ConstraintSpec& spec, const AlgorithmParams& params, double epsilon,
                                   std::uint64_t seed, std::optional<std::vector<std::size_t>> seed_ids = std::nullopt) {
  const std::size_t start = stream.passes();
  stream.meter().reset();
  if (spec.has_bounds()) detail::check_epsilon(epsilon);
  StreamList listed = stream_list(stream, space, k, params_for(params, spec), seed, std::move(seed_ids));

  std::vector<Candidate> candidates;
  while (auto c = listed.list.next()) candidates.push_back(std::move(*c));
  if (candidates.empty()) throw std::logic_error("stream solve: the candidate list was empty");
  stream.meter().add(candidates.size() * k);
  const std::size_t count = candidates.size();
  std::vector<double> costs(count, 0.0);

  std::size_t winner = 0;
  auto pick = [&]() {
    for (std::size_t c = 1; c < count; ++c) {
      if (std::tie(costs[c], candidates[c].repetition, candidates[c].index) <
          std::tie(costs[winner], candidates[winner].repetition, candidates[winner].index)) {
        winner = c;
      }
    }
  };

  StreamPartition result;
  if (spec.has_bounds()) {
    // Pass 4: one compressed graph per candidate.
    std::vector<RepresentativeGraph> graphs(count);
    for (std::size_t c = 0; c < count; ++c) {
      graphs[c].num_centers = k;
      graphs[c].epsilon = epsilon;
    }
    stream.pass([&](const StreamRecord& r) {
      for (std::size_t c = 0; c < count; ++c) {
        detail::add_to_graph(graphs[c], signature_of(space, r, candidates[c].centers, epsilon), stream.meter());
      }
    });
    spec.check_feasible(static_cast<std::size_t>(graphs.front().total_count()), k);
    std::vector<GraphAssignment> flows;
    flows.reserve(count);
    for (std::size_t c = 0; c < count; ++c) flows.push_back(solve_on_graph(graphs[c], spec));

    // Pass 5: true cost of every realized assignment.
    std::vector<std::vector<std::vector<std::int64_t>>> remaining(count);
    for (std::size_t c = 0; c < count; ++c) remaining[c] = flows[c].counts;
    stream.pass([&](const StreamRecord& r) {
      for (std::size_t c = 0; c < count; ++c) {
        const auto& centers = candidates[c].centers;
        const auto v = graphs[c].index.at(signature_of(space, r, centers, epsilon));
        std::size_t i = 0;
        while (remaining[c][i][v] == 0) ++i;
        --remaining[c][i][v];
        costs[c] += space.facility_cost(r, centers[i]);
      }
    });
    pick();

    // Pass 6: labels of the winner.
    result = detail::realize(stream, space, candidates[winner].centers, graphs[winner], flows[winner].counts);
    result.graph_cost = flows[winner].cost;
    result.demand_assignment = flows[winner].demand_assignment;
    result.graph_vertices = graphs[winner].vertices.size();
    std::size_t vertices = 0;
    for (const auto& g : graphs) vertices += g.vertices.size();
    stream.meter().remove(vertices);
  } else {
    // Pass 4: total nearest cost and the m farthest clients of every candidate.
    const std::size_t m = spec.excluded_count();
    std::vector<detail::FarthestTracker> trackers(count, detail::FarthestTracker(m));
    stream.meter().add(count * m);
    std::size_t n = 0;
    stream.pass([&](const StreamRecord& r) {
      for (std::size_t c = 0; c < count; ++c) {
        const double cost = detail::nearest_in_stream(space, r, candidates[c].centers).second;
        costs[c] += cost;
        trackers[c].offer(cost, n);
      }
      ++n;
    });
    spec.check_feasible(n, k);
    for (std::size_t c = 0; c < count; ++c) {
      for (const auto& item : trackers[c].items()) costs[c] -= item.first;
    }
    pick();

    // Pass 5: labels of the winner (its cost is recomputed exactly here).
    std::vector<std::size_t> dropped;
    for (const auto& item : trackers[winner].items()) dropped.push_back(item.second);
    std::sort(dropped.begin(), dropped.end());
    result = detail::assign_pass(stream, space, candidates[winner].centers, dropped);
    stream.meter().remove(count * m);
  }
  stream.meter().remove(count * k);

  StreamSolution out;
  out.centers = candidates[winner].centers;
  out.cost = result.cost;
  out.partition = std::move(result);
  out.provenance = {candidates[winner].repetition, candidates[winner].index, seed};
  out.candidates_evaluated = count;
  out.passes = stream.passes() - start;
  out.peak_memory = stream.meter().peak();
  out.seed_ids = listed.seed_ids;
  out.seeding_note = listed.seeding_note;
  detail::check_pass_budget(stream, start, stream_solve_pass_budget(spec), "stream_solve");
  return out;
}

}  // namespace ksvc
