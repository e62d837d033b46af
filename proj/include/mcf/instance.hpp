#pragma once
//
// Multi-commodity flow instances: commodities, per-source aggregation and a
// seeded generator for desk-scale test instances.
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcf/errors.hpp"
#include "mcf/graph.hpp"

namespace mcf {

struct Commodity {
  NodeId source = 0;
  NodeId sink = 0;
  double demand = 0.0;

  friend bool operator==(const Commodity&, const Commodity&) = default;
};

struct SinkDemand {
  NodeId sink = 0;
  double demand = 0.0;

  friend bool operator==(const SinkDemand&, const SinkDemand&) = default;
};

/// All commodities sharing one source. Sinks are distinct and sorted by id;
/// duplicate (s, t) pairs are merged by summing demand.
struct SourceGroup {
  NodeId source = 0;
  std::vector<int> members;              // commodity ids, ordered by sink
  std::vector<SinkDemand> sink_demands;  // one entry per distinct sink
  double total_demand = 0.0;

  friend bool operator==(const SourceGroup&, const SourceGroup&) = default;
};

/// Deterministic aggregation: groups ordered by source id, sinks by sink id.
inline std::vector<SourceGroup> group_by_source(std::span<const Commodity> commodities) {
  std::map<NodeId, std::map<NodeId, std::pair<double, std::vector<int>>>> by_source;
  for (std::size_t k = 0; k < commodities.size(); ++k) {
    auto& slot = by_source[commodities[k].source][commodities[k].sink];
    slot.first += commodities[k].demand;
    slot.second.push_back(static_cast<int>(k));
  }
  std::vector<SourceGroup> groups;
  groups.reserve(by_source.size());
  for (auto& [s, sinks] : by_source) {
    SourceGroup g;
    g.source = s;
    for (auto& [t, slot] : sinks) {
      g.sink_demands.push_back({t, slot.first});
      g.members.insert(g.members.end(), slot.second.begin(), slot.second.end());
      g.total_demand += slot.first;
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

/// Diagnostics collected while reading an instance; not part of its identity.
struct InstanceNotes {
  std::size_t dropped_zero_demand = 0;
  std::size_t dropped_self_pairs = 0;
  std::size_t dropped_unreachable = 0;
  std::size_t merged_duplicates = 0;
  int first_thru_node = 0;  // TNTP only, 1-based; 0 when absent
  std::vector<std::string> warnings;
};

class Instance {
 public:
  Instance() = default;

  /// Validates the commodities and merges duplicate (s, t) pairs, keeping the
  /// position of the first occurrence.
  Instance(std::string name, Network network, std::vector<Commodity> commodities, InstanceNotes notes = {})
      : name_(std::move(name)), network_(std::move(network)), notes_(std::move(notes)) {
    std::map<std::pair<NodeId, NodeId>, std::size_t> seen;
    for (const Commodity& c : commodities) {
      if (!network_.valid_node(c.source) || !network_.valid_node(c.sink)) {
        throw InputError("commodity references a node outside the network");
      }
      if (c.source == c.sink) throw InputError("commodity has identical source and sink");
      if (!(c.demand > 0.0) || !std::isfinite(c.demand)) throw InputError("commodity demand must be positive");
      auto [it, fresh] = seen.emplace(std::make_pair(c.source, c.sink), commodities_.size());
      if (fresh) {
        commodities_.push_back(c);
      } else {
        commodities_[it->second].demand += c.demand;
        ++notes_.merged_duplicates;
      }
    }
    groups_ = group_by_source(commodities_);
    group_of_.assign(commodities_.size(), -1);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      for (int k : groups_[g].members) group_of_[static_cast<std::size_t>(k)] = static_cast<int>(g);
    }
  }

  const std::string& name() const noexcept { return name_; }
  const Network& network() const noexcept { return network_; }
  std::span<const Commodity> commodities() const noexcept { return commodities_; }
  const Commodity& commodity(int k) const { return commodities_[static_cast<std::size_t>(k)]; }
  std::span<const SourceGroup> groups() const noexcept { return groups_; }
  const SourceGroup& group(int g) const { return groups_[static_cast<std::size_t>(g)]; }
  int group_of(int commodity) const { return group_of_[static_cast<std::size_t>(commodity)]; }
  const InstanceNotes& notes() const noexcept { return notes_; }

  std::size_t commodity_count() const noexcept { return commodities_.size(); }
  std::size_t source_count() const noexcept { return groups_.size(); }

  double total_demand() const noexcept {
    double d = 0.0;
    for (const Commodity& c : commodities_) d += c.demand;
    return d;
  }

  /// Equality over the data model (network, commodities, name); notes are ignored.
  friend bool operator==(const Instance& a, const Instance& b) {
    return a.name_ == b.name_ && a.network_ == b.network_ && a.commodities_ == b.commodities_;
  }

 private:
  std::string name_;
  Network network_;
  std::vector<Commodity> commodities_;
  std::vector<SourceGroup> groups_;
  std::vector<int> group_of_;
  InstanceNotes notes_;
};

enum class CapacityMode { Loose, Tight, Mixed };

struct GeneratorParams {
  NodeId nodes = 10;
  EdgeId edges = 30;
  std::size_t commodities = 20;
  std::size_t sources = 3;
  std::uint64_t seed = 0;
  CapacityMode capacity = CapacityMode::Loose;
  double tight_fraction = 0.5;  // share of tight edges in Mixed mode
  bool round_values = true;     // 3 decimals for costs, 2 for demands/capacities
  int max_retries = 32;
};

namespace detail {

inline std::vector<char> reachable_from(const Network& net, NodeId s) {
  std::vector<char> seen(static_cast<std::size_t>(net.node_count()), 0);
  std::vector<NodeId> stack{s};
  seen[static_cast<std::size_t>(s)] = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (EdgeId e : net.out_edges(u)) {
      const NodeId v = net.edge(e).head;
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

inline double round_to(double x, double scale) { return std::round(x * scale) / scale; }
inline double round_up_to(double x, double scale) { return std::ceil(x * scale - 1e-9) / scale; }

}  // namespace detail

/// Seeded random instance. Every sink is reachable from its source and the
/// capacities admit a feasible routing by construction (tight edges are sized
/// around a randomly perturbed reference routing).
inline Instance generate_random(const GeneratorParams& p) {
  if (p.nodes < 2) throw GenerationError("generator: need at least 2 nodes");
  if (p.edges < p.nodes - 1) throw GenerationError("generator: need edges >= nodes - 1");
  if (p.sources == 0 || p.sources > p.commodities) throw GenerationError("generator: need 1 <= sources <= commodities");
  if (p.sources > static_cast<std::size_t>(p.nodes)) throw GenerationError("generator: more sources than nodes");

  std::mt19937_64 rng(p.seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const double cost_scale = p.round_values ? 1000.0 : 0.0;
  const double qty_scale = p.round_values ? 100.0 : 0.0;
  auto rc = [&](double x) { return cost_scale > 0 ? detail::round_to(x, cost_scale) : x; };
  auto rq = [&](double x) { return qty_scale > 0 ? detail::round_to(x, qty_scale) : x; };
  auto rq_up = [&](double x) { return qty_scale > 0 ? detail::round_up_to(x, qty_scale) : x; };

  const auto n = static_cast<std::size_t>(p.nodes);
  for (int attempt = 0; attempt < p.max_retries; ++attempt) {
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::pair<NodeId, NodeId>> arcs;
    if (static_cast<std::size_t>(p.edges) >= n) {
      for (std::size_t i = 0; i < n; ++i) arcs.emplace_back(perm[i], perm[(i + 1) % n]);
    } else {
      for (std::size_t i = 0; i + 1 < n; ++i) arcs.emplace_back(perm[i], perm[i + 1]);
    }
    std::map<std::pair<NodeId, NodeId>, int> used;
    for (auto a : arcs) ++used[a];
    while (arcs.size() < static_cast<std::size_t>(p.edges)) {
      std::pair<NodeId, NodeId> a;
      for (int tries = 0; tries < 64; ++tries) {
        a = {static_cast<NodeId>(pick(n)), static_cast<NodeId>(pick(n))};
        if (a.first != a.second && used[a] == 0) break;
      }
      if (a.first == a.second) a.second = static_cast<NodeId>((static_cast<std::size_t>(a.first) + 1) % n);
      ++used[a];
      arcs.push_back(a);
    }
    std::shuffle(arcs.begin(), arcs.end(), rng);

    std::vector<Edge> edges;
    edges.reserve(arcs.size());
    for (auto [u, v] : arcs) edges.push_back({u, v, rc(uniform(1.0, 20.0)), 0.0});
    Network probe(p.nodes, edges);

    // Sources: distinct nodes that reach at least one other node.
    std::vector<NodeId> candidates(perm.begin(), perm.end());
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<NodeId> sources;
    std::vector<std::vector<NodeId>> sinks_left;
    for (NodeId c : candidates) {
      if (sources.size() == p.sources) break;
      const auto reach = detail::reachable_from(probe, c);
      std::vector<NodeId> sinks;
      for (std::size_t v = 0; v < n; ++v) {
        if (reach[v] && static_cast<NodeId>(v) != c) sinks.push_back(static_cast<NodeId>(v));
      }
      if (sinks.empty()) continue;
      std::shuffle(sinks.begin(), sinks.end(), rng);
      sources.push_back(c);
      sinks_left.push_back(std::move(sinks));
    }
    if (sources.size() < p.sources) continue;
    std::size_t pairs_available = 0;
    for (const auto& s : sinks_left) pairs_available += s.size();
    if (pairs_available < p.commodities) continue;

    std::vector<Commodity> commodities;
    commodities.reserve(p.commodities);
    auto draw = [&](std::size_t si) {
      const NodeId t = sinks_left[si].back();
      sinks_left[si].pop_back();
      commodities.push_back({sources[si], t, rq(uniform(1.0, 10.0))});
    };
    for (std::size_t si = 0; si < sources.size(); ++si) draw(si);
    while (commodities.size() < p.commodities) {
      std::size_t si = pick(sources.size());
      while (sinks_left[si].empty()) si = (si + 1) % sources.size();
      draw(si);
    }

    // Capacities.
    const double total_demand = std::accumulate(commodities.begin(), commodities.end(), 0.0,
                                                 [](double a, const Commodity& c) { return a + c.demand; });
    if (p.capacity == CapacityMode::Loose) {
      for (Edge& e : edges) e.capacity = rq_up(total_demand + 1.0);
    } else {
      std::vector<double> perturbed(edges.size());
      for (std::size_t e = 0; e < edges.size(); ++e) perturbed[e] = edges[e].cost * uniform(0.25, 4.0);
      const EdgeWeights pw(perturbed);
      std::vector<double> load(edges.size(), 0.0);
      for (const Commodity& c : commodities) {
        const NodeId targets[] = {c.sink};
        const SptResult spt = dijkstra(probe, pw, c.source, targets);
        for (EdgeId e : spt.path_to(probe, c.sink)) load[static_cast<std::size_t>(e)] += c.demand;
      }
      const double tight_share = p.capacity == CapacityMode::Tight ? 1.0 : p.tight_fraction;
      const double mean_demand = total_demand / static_cast<double>(commodities.size());
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (uniform(0.0, 1.0) < tight_share) {
          edges[e].capacity = load[e] > 0 ? rq_up(load[e] * uniform(1.0, 1.3)) : rq_up(uniform(0.0, mean_demand));
        } else {
          edges[e].capacity = rq_up(load[e] + total_demand * uniform(0.3, 1.0));
        }
      }
    }
    return Instance("random-" + std::to_string(p.nodes) + "-" + std::to_string(p.edges) + "-" +
                        std::to_string(p.commodities) + "-" + std::to_string(p.sources) + "-" +
                        std::to_string(p.seed),
                    Network(p.nodes, std::move(edges)), std::move(commodities));
  }
  throw GenerationError("generator: parameters could not be satisfied after " + std::to_string(p.max_retries) +
                        " attempts");
}

inline Instance generate_random(NodeId nodes, EdgeId edges, std::size_t commodities, std::size_t sources,
                                std::uint64_t seed) {
  GeneratorParams p;
  p.nodes = nodes;
  p.edges = edges;
  p.commodities = commodities;
  p.sources = sources;
  p.seed = seed;
  return generate_random(p);
}

}  // namespace mcf
