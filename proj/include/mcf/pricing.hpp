#pragma once
//
// Pricing: shortest paths per commodity (one search per source group) and
// shortest-path trees per source, under the dual-adjusted weights c - mu.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "mcf/column.hpp"
#include "mcf/errors.hpp"
#include "mcf/graph.hpp"
#include "mcf/instance.hpp"

namespace mcf {

enum class PricingStrategy { Full, Bounded, AStar };
enum class HeuristicScope { Global, PerSource };

inline const char* to_string(PricingStrategy s) {
  switch (s) {
    case PricingStrategy::Full: return "full";
    case PricingStrategy::Bounded: return "bounded";
    case PricingStrategy::AStar: return "astar";
  }
  return "?";
}

inline const char* to_string(HeuristicScope s) { return s == HeuristicScope::Global ? "global" : "per-source"; }

inline std::optional<PricingStrategy> parse_pricing(std::string_view s) {
  if (s == "full") return PricingStrategy::Full;
  if (s == "bounded") return PricingStrategy::Bounded;
  if (s == "astar") return PricingStrategy::AStar;
  return std::nullopt;
}

inline std::optional<HeuristicScope> parse_heuristic(std::string_view s) {
  if (s == "global") return HeuristicScope::Global;
  if (s == "per-source" || s == "per_source") return HeuristicScope::PerSource;
  return std::nullopt;
}

/// Duals handed to pricing. `pi` is indexed by owner, `mu` by edge (0 on inactive rows).
struct DualSnapshot {
  std::vector<double> pi;
  std::vector<double> mu;
};

/// What a pricing run learned about an owner's minimum reduced cost.
/// NonNegative: the search proved min >= 0 without computing it.
struct ReducedCostBound {
  enum class State { Unknown, Exact, NonNegative };
  State state = State::Unknown;
  double value = 0.0;

  static ReducedCostBound exact(double v) { return {State::Exact, v}; }
  static ReducedCostBound nonnegative() { return {State::NonNegative, 0.0}; }
  bool known() const noexcept { return state != State::Unknown; }
  /// min(0, value), meaningful only when known().
  double negative_part() const noexcept { return state == State::Exact ? std::min(0.0, value) : 0.0; }
};

struct PricingStats {
  std::size_t runs = 0;
  std::size_t settled = 0;
  std::size_t relaxations = 0;
  std::size_t early_stops = 0;

  PricingStats& operator+=(const PricingStats& o) {
    runs += o.runs;
    settled += o.settled;
    relaxations += o.relaxations;
    early_stops += o.early_stops;
    return *this;
  }
};

struct PricingOutcome {
  std::vector<Column> columns;                              // reduced cost below -tolerance
  std::vector<double> column_reduced_costs;                 // parallel to columns
  std::vector<std::pair<int, ReducedCostBound>> bounds;     // owner -> bound
  std::vector<int> unreachable;                             // commodity ids without any s-t path
  PricingStats stats;
};

namespace detail {

inline void record_run(PricingStats& st, const SptResult& spt) {
  ++st.runs;
  st.settled += spt.settled_count();
  st.relaxations += spt.relaxations;
  if (spt.stopped_early) ++st.early_stops;
}

inline std::vector<NodeId> group_sinks(const SourceGroup& g) {
  std::vector<NodeId> t;
  t.reserve(g.sink_demands.size());
  for (const SinkDemand& sd : g.sink_demands) t.push_back(sd.sink);
  return t;
}

}  // namespace detail

/// Weights c_e - mu_e. Tiny negative values from dual noise are clamped to 0.
inline EdgeWeights pricing_weights(std::span<const double> costs, std::span<const double> mu) {
  std::vector<double> w(costs.begin(), costs.end());
  for (std::size_t e = 0; e < w.size(); ++e) {
    if (!mu.empty()) w[e] -= mu[e];
    if (w[e] < 0.0) {
      if (w[e] < -1e-9 * (1.0 + std::abs(costs[e]))) {
        throw InternalError("pricing: negative adjusted weight on edge " + std::to_string(e));
      }
      w[e] = 0.0;
    }
  }
  return EdgeWeights(std::move(w));
}

/// Accumulates group demand bottom-up along parent edges. Returns (edge, flow)
/// sorted by edge id; every sink must be settled.
inline std::vector<std::pair<EdgeId, double>> compute_tree_flows(const Network& net, const SptResult& spt,
                                                                 std::span<const SinkDemand> sink_demands) {
  std::vector<double> acc(static_cast<std::size_t>(net.node_count()), 0.0);
  for (const SinkDemand& sd : sink_demands) {
    if (!spt.is_settled(sd.sink)) throw InternalError("tree flows: sink " + std::to_string(sd.sink) + " is not settled");
    acc[static_cast<std::size_t>(sd.sink)] += sd.demand;
  }
  std::vector<std::pair<EdgeId, double>> flows;
  for (auto it = spt.settled_order.rbegin(); it != spt.settled_order.rend(); ++it) {
    const NodeId v = *it;
    const double a = acc[static_cast<std::size_t>(v)];
    if (v == spt.source || a == 0.0) continue;
    const EdgeId e = spt.parent_edge[static_cast<std::size_t>(v)];
    flows.emplace_back(e, a);
    acc[static_cast<std::size_t>(net.edge(e).tail)] += a;
  }
  std::sort(flows.begin(), flows.end());
  return flows;
}

/// Path pricing for every commodity of `group_id`, from one search at its source.
/// `base_costs` are the edge costs entering the reduced cost (zero in a feasibility phase).
/// A path is emitted when d_k times its reduced cost is below -tolerance, the
/// same units a tree column of the group is judged in.
inline PricingOutcome price_paths(const Instance& inst, int group_id, const DualSnapshot& duals,
                                  std::span<const double> base_costs, PricingStrategy strategy,
                                  const HeuristicBounds* h, double tolerance) {
  const Network& net = inst.network();
  const SourceGroup& g = inst.group(group_id);
  if (g.members.empty()) throw InputError("price_paths: empty group");
  const EdgeWeights w = pricing_weights(base_costs, duals.mu);
  std::vector<SinkDual> dest;
  dest.reserve(g.members.size());
  for (int k : g.members) dest.push_back({inst.commodity(k).sink, duals.pi[static_cast<std::size_t>(k)]});

  SptResult spt;
  switch (strategy) {
    case PricingStrategy::Full: {
      const auto targets = detail::group_sinks(g);
      spt = dijkstra(net, w, g.source, targets);
      break;
    }
    case PricingStrategy::Bounded:
      spt = dijkstra_bounded(net, w, g.source, dest);
      break;
    case PricingStrategy::AStar:
      if (!h) throw InputError("price_paths: A* needs heuristic bounds");
      spt = astar(net, w, g.source, dest, *h);
      break;
  }

  PricingOutcome out;
  detail::record_run(out.stats, spt);
  for (int k : g.members) {
    const Commodity& c = inst.commodity(k);
    const double pi = duals.pi[static_cast<std::size_t>(k)];
    if (!spt.is_settled(c.sink)) {
      if (spt.stopped_early) {
        // The stop key already reached max pi, so dist(t) >= pi.
        out.bounds.emplace_back(k, ReducedCostBound::nonnegative());
      } else {
        out.unreachable.push_back(k);
        out.bounds.emplace_back(k, ReducedCostBound::nonnegative());
      }
      continue;
    }
    const double rc = spt.distance(c.sink) - pi;
    out.bounds.emplace_back(k, ReducedCostBound::exact(rc));
    if (rc * c.demand < -tolerance) {
      Column col;
      col.kind = MasterMode::Path;
      col.owner = k;
      col.edges = spt.path_to(net, c.sink);
      col.flows.assign(col.edges.size(), 1.0);
      col.cost = column_cost(net, col);
      out.columns.push_back(std::move(col));
      out.column_reduced_costs.push_back(rc);
    }
  }
  return out;
}

/// Tree pricing for one source group: the shortest-path tree spanning its sinks.
inline PricingOutcome price_tree(const Instance& inst, int group_id, const DualSnapshot& duals,
                                 std::span<const double> base_costs, double tolerance) {
  const Network& net = inst.network();
  const SourceGroup& g = inst.group(group_id);
  const EdgeWeights w = pricing_weights(base_costs, duals.mu);
  const auto targets = detail::group_sinks(g);
  const SptResult spt = dijkstra(net, w, g.source, targets);

  PricingOutcome out;
  detail::record_run(out.stats, spt);
  for (int k : g.members) {
    if (!spt.is_settled(inst.commodity(k).sink)) out.unreachable.push_back(k);
  }
  if (!out.unreachable.empty()) {
    out.bounds.emplace_back(group_id, ReducedCostBound::nonnegative());
    return out;
  }
  Column col;
  col.kind = MasterMode::Tree;
  col.owner = group_id;
  double reduced = 0.0;
  for (const auto& [e, f] : compute_tree_flows(net, spt, g.sink_demands)) {
    col.edges.push_back(e);
    col.flows.push_back(f);
    reduced += f * w[e];
  }
  col.cost = column_cost(net, col);
  reduced -= duals.pi[static_cast<std::size_t>(group_id)];
  out.bounds.emplace_back(group_id, ReducedCostBound::exact(reduced));
  if (reduced < -tolerance) {
    out.columns.push_back(std::move(col));
    out.column_reduced_costs.push_back(reduced);
  }
  return out;
}

/// z + sum_o weight_o * min(0, rc_o); nullopt if any owner is unknown.
/// Path mode weights are the demands d_k, tree mode weights are 1.
inline std::optional<double> lagrangian_bound(double rmp_objective, std::span<const ReducedCostBound> bounds,
                                              std::span<const double> weights) {
  if (bounds.size() != weights.size()) throw InputError("lagrangian_bound: size mismatch");
  double lb = rmp_objective;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!bounds[i].known()) return std::nullopt;
    lb += weights[i] * bounds[i].negative_part();
  }
  return lb;
}

/// Reverse multi-target bounds computed once from the raw edge costs. Since
/// mu <= 0, c - mu >= c and these bounds stay consistent for every round.
class HeuristicCache {
 public:
  HeuristicCache(const Instance& inst, HeuristicScope scope) : inst_(&inst), scope_(scope) {
    if (scope == HeuristicScope::PerSource) per_source_.resize(inst.source_count());
  }

  const HeuristicBounds& get(int group_id) {
    const EdgeWeights w(inst_->network().costs());
    if (scope_ == HeuristicScope::Global) {
      if (!global_) {
        std::vector<NodeId> all;
        for (const Commodity& c : inst_->commodities()) all.push_back(c.sink);
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        global_ = reverse_multi_target_bounds(inst_->network(), w, all);
      }
      return *global_;
    }
    auto& slot = per_source_[static_cast<std::size_t>(group_id)];
    if (!slot) slot = reverse_multi_target_bounds(inst_->network(), w, detail::group_sinks(inst_->group(group_id)));
    return *slot;
  }

  /// Fills every bound a round over `groups` can ask for (so workers only read).
  void prepare(std::span<const int> groups) {
    if (scope_ == HeuristicScope::Global) {
      get(0);
      return;
    }
    for (int g : groups) get(g);
  }

 private:
  const Instance* inst_;
  HeuristicScope scope_;
  std::optional<HeuristicBounds> global_;
  std::vector<std::optional<HeuristicBounds>> per_source_;
};

struct PricingOptions {
  PricingStrategy strategy = PricingStrategy::Full;
  HeuristicScope scope = HeuristicScope::Global;
  int threads = 1;
};

/// Result of pricing a sequence of groups, in group order.
struct RoundResult {
  std::vector<Column> columns;
  std::vector<double> column_reduced_costs;
  std::vector<ReducedCostBound> bounds;  // per owner; Unknown where not priced
  std::vector<int> unreachable;
  std::size_t groups_priced = 0;
  PricingStats stats;
};

/// Prices `groups` in order and stops after the group that brings the column
/// count to `column_limit`. Workers price batches concurrently; results are
/// merged in group order, so the outcome does not depend on `threads`.
inline RoundResult price_round(const Instance& inst, MasterMode mode, const DualSnapshot& duals,
                               std::span<const double> base_costs, std::span<const int> groups,
                               const PricingOptions& opt, HeuristicCache* cache, double tolerance,
                               std::size_t column_limit = std::numeric_limits<std::size_t>::max()) {
  RoundResult r;
  r.bounds.assign(static_cast<std::size_t>(owner_count(inst, mode)), ReducedCostBound{});
  const bool use_astar = mode == MasterMode::Path && opt.strategy == PricingStrategy::AStar;
  if (use_astar) {
    if (!cache) throw InputError("price_round: A* needs a heuristic cache");
    cache->prepare(groups);
  }
  auto price_one = [&](int g) {
    if (mode == MasterMode::Tree) return price_tree(inst, g, duals, base_costs, tolerance);
    const HeuristicBounds* h = use_astar ? &cache->get(g) : nullptr;
    return price_paths(inst, g, duals, base_costs, opt.strategy, h, tolerance);
  };

  const std::size_t threads = static_cast<std::size_t>(std::max(1, opt.threads));
  const std::size_t batch = threads == 1 ? 1 : threads * 4;
  std::vector<PricingOutcome> slot(batch);
  for (std::size_t begin = 0; begin < groups.size(); begin += batch) {
    const std::size_t end = std::min(groups.size(), begin + batch);
    if (threads == 1 || end - begin == 1) {
      for (std::size_t i = begin; i < end; ++i) slot[i - begin] = price_one(groups[i]);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(threads);
      for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t i = begin + t; i < end; i += threads) slot[i - begin] = price_one(groups[i]);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    for (std::size_t i = begin; i < end; ++i) {
      PricingOutcome& o = slot[i - begin];
      for (auto& [owner, b] : o.bounds) r.bounds[static_cast<std::size_t>(owner)] = b;
      for (std::size_t c = 0; c < o.columns.size(); ++c) {
        r.columns.push_back(std::move(o.columns[c]));
        r.column_reduced_costs.push_back(o.column_reduced_costs[c]);
      }
      r.unreachable.insert(r.unreachable.end(), o.unreachable.begin(), o.unreachable.end());
      r.stats += o.stats;
      ++r.groups_priced;
      if (r.columns.size() >= column_limit) return r;
    }
  }
  return r;
}

}  // namespace mcf
