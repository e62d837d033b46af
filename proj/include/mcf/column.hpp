#pragma once
//
// Columns of the decomposed master problem. A path column belongs to one
// commodity and carries unit flow on each edge of a simple s-t path; a tree
// column belongs to a source group and carries the accumulated group demand
// on each edge of a tree rooted at the source.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcf/errors.hpp"
#include "mcf/graph.hpp"
#include "mcf/instance.hpp"

namespace mcf {

enum class MasterMode { Path, Tree };

inline const char* to_string(MasterMode m) { return m == MasterMode::Path ? "path" : "tree"; }

struct Column {
  MasterMode kind = MasterMode::Path;
  int owner = 0;               // commodity id (path) or group id (tree)
  std::vector<EdgeId> edges;   // path order for paths, ascending id for trees
  std::vector<double> flows;   // parallel to edges
  double cost = 0.0;
};

/// Number of demand rows, i.e. column owners, of a master in `mode`.
inline int owner_count(const Instance& inst, MasterMode mode) {
  return static_cast<int>(mode == MasterMode::Path ? inst.commodity_count() : inst.source_count());
}

/// Right-hand side of the owner's demand row.
inline double owner_rhs(const Instance& inst, MasterMode mode, int owner) {
  return mode == MasterMode::Path ? inst.commodity(owner).demand : 1.0;
}

/// Total demand an owner's row stands for (d_k in path mode, d_s in tree mode).
inline double owner_flow(const Instance& inst, MasterMode mode, int owner) {
  return mode == MasterMode::Path ? inst.commodity(owner).demand : inst.group(owner).total_demand;
}

inline double column_cost(const Network& net, const Column& col) {
  double c = 0.0;
  for (std::size_t i = 0; i < col.edges.size(); ++i) c += col.flows[i] * net.edge(col.edges[i]).cost;
  return c;
}

/// sum_e flow_e * (c_e - mu_e) - pi_owner with caller-supplied edge costs.
inline double reduced_cost(const Column& col, std::span<const double> costs, std::span<const double> mu, double pi) {
  double r = 0.0;
  for (std::size_t i = 0; i < col.edges.size(); ++i) {
    const auto e = static_cast<std::size_t>(col.edges[i]);
    r += col.flows[i] * (costs[e] - (mu.empty() ? 0.0 : mu[e]));
  }
  return r - pi;
}

namespace detail {

inline void check_cost(const Network& net, const Column& col) {
  const double c = column_cost(net, col);
  if (std::abs(c - col.cost) > 1e-9 * std::max(1.0, std::abs(c))) {
    throw InternalError("column: stored cost " + std::to_string(col.cost) + " differs from recomputed " +
                        std::to_string(c));
  }
}

inline void validate_path(const Instance& inst, const Column& col) {
  if (col.owner < 0 || static_cast<std::size_t>(col.owner) >= inst.commodity_count()) {
    throw InternalError("path column: owner " + std::to_string(col.owner) + " has no demand row");
  }
  const Network& net = inst.network();
  const Commodity& k = inst.commodity(col.owner);
  if (col.edges.empty()) throw InternalError("path column: empty path");
  std::vector<char> seen(static_cast<std::size_t>(net.node_count()), 0);
  NodeId v = k.source;
  seen[static_cast<std::size_t>(v)] = 1;
  for (std::size_t i = 0; i < col.edges.size(); ++i) {
    if (!net.valid_edge(col.edges[i])) throw InternalError("path column: invalid edge");
    if (col.flows[i] != 1.0) throw InternalError("path column: coefficient other than 1");
    const Edge& e = net.edge(col.edges[i]);
    if (e.tail != v) throw InternalError("path column: edges are not contiguous");
    v = e.head;
    if (seen[static_cast<std::size_t>(v)]) throw InternalError("path column: path revisits node " + std::to_string(v));
    seen[static_cast<std::size_t>(v)] = 1;
  }
  if (v != k.sink) throw InternalError("path column: path ends at " + std::to_string(v) + ", not at the sink");
}

inline void validate_tree(const Instance& inst, const Column& col) {
  if (col.owner < 0 || static_cast<std::size_t>(col.owner) >= inst.source_count()) {
    throw InternalError("tree column: owner " + std::to_string(col.owner) + " has no demand row");
  }
  const Network& net = inst.network();
  const SourceGroup& g = inst.group(col.owner);
  const auto n = static_cast<std::size_t>(net.node_count());
  std::vector<EdgeId> parent(n, kNoEdge);
  std::vector<double> balance(n, 0.0);
  for (std::size_t i = 0; i < col.edges.size(); ++i) {
    const EdgeId id = col.edges[i];
    if (!net.valid_edge(id)) throw InternalError("tree column: invalid edge");
    if (i > 0 && col.edges[i - 1] >= id) throw InternalError("tree column: edges not strictly ascending");
    if (!(col.flows[i] > 0.0)) throw InternalError("tree column: nonpositive flow on edge " + std::to_string(id));
    const Edge& e = net.edge(id);
    if (e.head == g.source) throw InternalError("tree column: edge enters the root");
    if (parent[static_cast<std::size_t>(e.head)] != kNoEdge) {
      throw InternalError("tree column: node " + std::to_string(e.head) + " has in-degree above one");
    }
    parent[static_cast<std::size_t>(e.head)] = id;
    balance[static_cast<std::size_t>(e.head)] += col.flows[i];
    balance[static_cast<std::size_t>(e.tail)] -= col.flows[i];
  }
  // Every support node must reach the root through parents (no cycles).
  for (std::size_t i = 0; i < col.edges.size(); ++i) {
    NodeId v = net.edge(col.edges[i]).head;
    std::size_t steps = 0;
    while (v != g.source) {
      const EdgeId p = parent[static_cast<std::size_t>(v)];
      if (p == kNoEdge) throw InternalError("tree column: support is not connected to the root");
      v = net.edge(p).tail;
      if (++steps > col.edges.size()) throw InternalError("tree column: support contains a cycle");
    }
  }
  std::map<NodeId, double> demand;
  for (const SinkDemand& sd : g.sink_demands) demand[sd.sink] = sd.demand;
  const double tol = 1e-9 * std::max(1.0, g.total_demand);
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<NodeId>(v) == g.source) continue;
    const auto it = demand.find(static_cast<NodeId>(v));
    const double want = it == demand.end() ? 0.0 : it->second;
    if (std::abs(balance[v] - want) > tol) {
      throw InternalError("tree column: flow balance at node " + std::to_string(v) + " is " +
                          std::to_string(balance[v]) + ", expected " + std::to_string(want));
    }
  }
}

}  // namespace detail

/// Throws InternalError describing the first violated column invariant.
inline void validate_column(const Instance& inst, const Column& col) {
  if (col.edges.size() != col.flows.size()) throw InternalError("column: edges/flows size mismatch");
  if (col.kind == MasterMode::Path) {
    detail::validate_path(inst, col);
  } else {
    detail::validate_tree(inst, col);
  }
  detail::check_cost(inst.network(), col);
}

/// Order-independent fingerprint of (owner, support).
inline std::uint64_t support_hash(const Column& col) {
  std::vector<EdgeId> s = col.edges;
  std::sort(s.begin(), s.end());
  std::uint64_t h = 1469598103934665603ULL ^ static_cast<std::uint64_t>(col.owner);
  for (EdgeId e : s) {
    h ^= static_cast<std::uint64_t>(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace mcf
