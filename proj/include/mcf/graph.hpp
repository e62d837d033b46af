#pragma once
//
// Directed network storage and the shortest-path kernels used by pricing:
// plain Dijkstra, Dijkstra with the demand-dual stop test, A* on top of a
// consistent lower bound, and multi-target reverse bounds.
//

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcf/errors.hpp"

namespace mcf {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

inline constexpr EdgeId kNoEdge = -1;
/// Label of a node that has not been reached. Never used in arithmetic.
inline constexpr double kUnreached = std::numeric_limits<double>::infinity();

struct Edge {
  NodeId tail = 0;
  NodeId head = 0;
  double cost = 0.0;
  double capacity = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable directed multigraph with forward and reverse compressed adjacency.
/// Parallel edges and self-loops are kept as given.
class Network {
 public:
  Network() = default;

  Network(NodeId node_count, std::vector<Edge> edges) : node_count_(node_count), edges_(std::move(edges)) {
    if (node_count_ < 0) throw InputError("network: negative node count");
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const Edge& ed = edges_[e];
      if (!valid_node(ed.tail) || !valid_node(ed.head)) {
        throw InputError("network: edge " + std::to_string(e) + " has endpoint outside [0, " +
                         std::to_string(node_count_) + ")");
      }
      if (!(ed.cost >= 0.0) || !std::isfinite(ed.cost)) {
        throw InputError("network: edge " + std::to_string(e) + " has invalid cost");
      }
      if (!(ed.capacity >= 0.0) || std::isnan(ed.capacity)) {
        throw InputError("network: edge " + std::to_string(e) + " has invalid capacity");
      }
    }
    build_index(true, out_start_, out_edges_);
    build_index(false, in_start_, in_edges_);
  }

  NodeId node_count() const noexcept { return node_count_; }
  EdgeId edge_count() const noexcept { return static_cast<EdgeId>(edges_.size()); }
  bool valid_node(NodeId v) const noexcept { return v >= 0 && v < node_count_; }
  bool valid_edge(EdgeId e) const noexcept { return e >= 0 && e < edge_count(); }

  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Outgoing edges of v in increasing edge id order.
  std::span<const EdgeId> out_edges(NodeId v) const {
    const auto b = static_cast<std::size_t>(out_start_[static_cast<std::size_t>(v)]);
    const auto e = static_cast<std::size_t>(out_start_[static_cast<std::size_t>(v) + 1]);
    return std::span<const EdgeId>(out_edges_).subspan(b, e - b);
  }
  /// Incoming edges of v in increasing edge id order.
  std::span<const EdgeId> in_edges(NodeId v) const {
    const auto b = static_cast<std::size_t>(in_start_[static_cast<std::size_t>(v)]);
    const auto e = static_cast<std::size_t>(in_start_[static_cast<std::size_t>(v) + 1]);
    return std::span<const EdgeId>(in_edges_).subspan(b, e - b);
  }

  double total_cost() const noexcept {
    double s = 0.0;
    for (const Edge& e : edges_) s += e.cost;
    return s;
  }

  std::vector<double> costs() const {
    std::vector<double> c(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) c[e] = edges_[e].cost;
    return c;
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
  }

 private:
  void build_index(bool forward, std::vector<std::int32_t>& start, std::vector<EdgeId>& list) const {
    start.assign(static_cast<std::size_t>(node_count_) + 1, 0);
    for (const Edge& e : edges_) ++start[static_cast<std::size_t>(forward ? e.tail : e.head) + 1];
    for (std::size_t v = 0; v < static_cast<std::size_t>(node_count_); ++v) start[v + 1] += start[v];
    list.assign(edges_.size(), kNoEdge);
    std::vector<std::int32_t> fill(start.begin(), start.end() - 1);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const NodeId v = forward ? edges_[e].tail : edges_[e].head;
      list[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = static_cast<EdgeId>(e);
    }
  }

  NodeId node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::int32_t> out_start_{0};
  std::vector<EdgeId> out_edges_;
  std::vector<std::int32_t> in_start_{0};
  std::vector<EdgeId> in_edges_;
};

/// Nonnegative per-edge weights, typically the dual-adjusted costs c_e - mu_e.
class EdgeWeights {
 public:
  EdgeWeights() = default;
  explicit EdgeWeights(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t e = 0; e < values_.size(); ++e) {
      if (!(values_[e] >= 0.0) || !std::isfinite(values_[e])) {
        throw InputError("edge weight " + std::to_string(e) + " is negative or not finite");
      }
    }
  }

  /// c_e - mu_e for every edge, with mu given per edge (mu_e <= 0 after normalization).
  static EdgeWeights adjusted(std::span<const double> costs, std::span<const double> mu) {
    if (costs.size() != mu.size()) throw InputError("adjusted weights: size mismatch");
    std::vector<double> w(costs.size());
    for (std::size_t e = 0; e < costs.size(); ++e) w[e] = costs[e] - mu[e];
    return EdgeWeights(std::move(w));
  }

  double operator[](EdgeId e) const { return values_[static_cast<std::size_t>(e)]; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

struct SptResult {
  NodeId source = 0;
  std::vector<double> dist;          // kUnreached where no label exists
  std::vector<EdgeId> parent_edge;   // kNoEdge for the source and unreached nodes
  std::vector<char> settled;         // final labels
  std::vector<NodeId> settled_order; // extraction order, nondecreasing key
  std::size_t relaxations = 0;
  bool stopped_early = false;        // the dual stop test fired

  bool is_settled(NodeId v) const { return settled[static_cast<std::size_t>(v)] != 0; }
  double distance(NodeId v) const { return dist[static_cast<std::size_t>(v)]; }
  std::size_t settled_count() const noexcept { return settled_order.size(); }

  /// Edge sequence source -> v along parent edges. v must be settled.
  std::vector<EdgeId> path_to(const Network& net, NodeId v) const {
    if (!is_settled(v)) throw InternalError("path_to: node " + std::to_string(v) + " is not settled");
    std::vector<EdgeId> path;
    while (v != source) {
      const EdgeId e = parent_edge[static_cast<std::size_t>(v)];
      if (e == kNoEdge) throw InternalError("path_to: broken parent chain");
      path.push_back(e);
      v = net.edge(e).tail;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }
};

/// Lower bound on the remaining distance from each node to a destination set.
/// Nodes that cannot reach any destination carry kUnreached.
struct HeuristicBounds {
  std::vector<double> h;
  double operator[](NodeId v) const { return h[static_cast<std::size_t>(v)]; }
};

struct SinkDual {
  NodeId sink = 0;
  double dual = 0.0;
};

namespace detail {

/// Best-first search shared by every forward kernel. Keys are g(v) + h(v)
/// (h may be null, meaning zero). `stop(key)` is consulted before a node is
/// settled; returning true ends the search with stopped_early set. The search
/// also ends once every node in `targets` is settled.
template <class StopTest>
SptResult best_first(const Network& net, const EdgeWeights& w, NodeId source,
                     const HeuristicBounds* h, std::span<const NodeId> targets, StopTest&& stop) {
  if (!net.valid_node(source)) throw InputError("shortest path: invalid source node " + std::to_string(source));
  if (w.size() != static_cast<std::size_t>(net.edge_count())) throw InputError("shortest path: weight size mismatch");
  if (h && h->h.size() != static_cast<std::size_t>(net.node_count())) throw InputError("shortest path: heuristic size mismatch");

  const auto n = static_cast<std::size_t>(net.node_count());
  SptResult r;
  r.source = source;
  r.dist.assign(n, kUnreached);
  r.parent_edge.assign(n, kNoEdge);
  r.settled.assign(n, 0);

  std::vector<char> is_target(n, 0);
  std::size_t targets_left = 0;
  for (NodeId t : targets) {
    if (!net.valid_node(t)) throw InputError("shortest path: invalid target node " + std::to_string(t));
    if (!is_target[static_cast<std::size_t>(t)]) {
      is_target[static_cast<std::size_t>(t)] = 1;
      ++targets_left;
    }
  }
  const bool use_targets = !targets.empty();

  auto hval = [&](NodeId v) { return h ? (*h)[v] : 0.0; };
  r.dist[static_cast<std::size_t>(source)] = 0.0;
  if (hval(source) == kUnreached) return r;  // no destination is reachable at all

  using Item = std::pair<double, NodeId>;  // (key, node): ties broken by node id
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.emplace(hval(source), source);

  while (!heap.empty()) {
    const auto [key, u] = heap.top();
    const auto ui = static_cast<std::size_t>(u);
    if (r.settled[ui]) {
      heap.pop();
      continue;
    }
    if (key > r.dist[ui] + hval(u)) {  // stale entry
      heap.pop();
      continue;
    }
    if (stop(key)) {
      r.stopped_early = true;
      break;
    }
    heap.pop();
    r.settled[ui] = 1;
    r.settled_order.push_back(u);
    if (use_targets && is_target[ui] && --targets_left == 0) break;

    const double gu = r.dist[ui];
    const double hu = hval(u);
    for (EdgeId e : net.out_edges(u)) {
      const NodeId v = net.edge(e).head;
      if (v == u) continue;  // self-loops never improve a label
      const auto vi = static_cast<std::size_t>(v);
      if (r.settled[vi]) continue;
      const double hv = hval(v);
      if (hv == kUnreached) continue;  // v cannot lead to a destination
      if (h && hu > w[e] + hv + 1e-9 * (1.0 + std::abs(hu))) {
        throw InternalError("astar: heuristic is inconsistent on edge " + std::to_string(e) + " (" +
                            std::to_string(u) + "->" + std::to_string(v) + ")");
      }
      assert(gu != kUnreached);
      const double g = gu + w[e];
      ++r.relaxations;
      if (g < r.dist[vi]) {
        r.dist[vi] = g;
        r.parent_edge[vi] = e;
        heap.emplace(g + hv, v);
      } else if (g == r.dist[vi] && e < r.parent_edge[vi]) {
        r.parent_edge[vi] = e;
      }
    }
  }
  return r;
}

inline double max_dual(std::span<const SinkDual> dest_duals) {
  if (dest_duals.empty()) throw InputError("bounded pricing: empty destination dual map");
  double pi = -std::numeric_limits<double>::infinity();
  for (const SinkDual& sd : dest_duals) pi = std::max(pi, sd.dual);
  return pi;
}

inline std::vector<NodeId> sinks_of(std::span<const SinkDual> dest_duals) {
  std::vector<NodeId> t;
  t.reserve(dest_duals.size());
  for (const SinkDual& sd : dest_duals) t.push_back(sd.sink);
  return t;
}

}  // namespace detail

/// Exact shortest distances from `source`. With a target set the search may
/// stop as soon as every target is settled.
inline SptResult dijkstra(const Network& net, const EdgeWeights& w, NodeId source,
                          std::span<const NodeId> targets = {}) {
  return detail::best_first(net, w, source, nullptr, targets, [](double) { return false; });
}

/// Dijkstra that stops once the minimum heap key reaches max_k pi_k. Every
/// sink settled with dist < pi is exactly a sink with a negative reduced-cost path.
inline SptResult dijkstra_bounded(const Network& net, const EdgeWeights& w, NodeId source,
                                  std::span<const SinkDual> dest_duals) {
  const double pi_max = detail::max_dual(dest_duals);
  const auto targets = detail::sinks_of(dest_duals);
  return detail::best_first(net, w, source, nullptr, targets, [pi_max](double key) { return key >= pi_max; });
}

/// A* with keys g + h and the same global stop test as dijkstra_bounded.
/// Throws InternalError when a relaxation exposes an inconsistent h.
inline SptResult astar(const Network& net, const EdgeWeights& w, NodeId source,
                       std::span<const SinkDual> dest_duals, const HeuristicBounds& h) {
  const double pi_max = detail::max_dual(dest_duals);
  const auto targets = detail::sinks_of(dest_duals);
  return detail::best_first(net, w, source, &h, targets, [pi_max](double key) { return key >= pi_max; });
}

/// h(v) = min over destinations t of dist(v, t), via multi-source Dijkstra on the reversed graph.
inline HeuristicBounds reverse_multi_target_bounds(const Network& net, const EdgeWeights& w,
                                                   std::span<const NodeId> destinations) {
  if (destinations.empty()) throw InputError("reverse bounds: empty destination set");
  if (w.size() != static_cast<std::size_t>(net.edge_count())) throw InputError("reverse bounds: weight size mismatch");
  const auto n = static_cast<std::size_t>(net.node_count());
  HeuristicBounds b;
  b.h.assign(n, kUnreached);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (NodeId t : destinations) {
    if (!net.valid_node(t)) throw InputError("reverse bounds: invalid destination " + std::to_string(t));
    b.h[static_cast<std::size_t>(t)] = 0.0;
    heap.emplace(0.0, t);
  }
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    const auto vi = static_cast<std::size_t>(v);
    if (done[vi] || d > b.h[vi]) continue;
    done[vi] = 1;
    for (EdgeId e : net.in_edges(v)) {
      const NodeId u = net.edge(e).tail;
      const auto ui = static_cast<std::size_t>(u);
      if (u == v || done[ui]) continue;
      const double g = d + w[e];
      if (g < b.h[ui]) {
        b.h[ui] = g;
        heap.emplace(g, u);
      }
    }
  }
  return b;
}

/// Sinks whose settled label lies strictly below their dual.
inline std::vector<NodeId> negative_sinks(const SptResult& spt, std::span<const SinkDual> dest_duals) {
  std::vector<NodeId> out;
  for (const SinkDual& sd : dest_duals) {
    if (spt.is_settled(sd.sink) && spt.distance(sd.sink) < sd.dual) out.push_back(sd.sink);
  }
  return out;
}

}  // namespace mcf
