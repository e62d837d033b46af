#pragma once
//
// Per-source edge flows and their decomposition into per-commodity paths.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcf/column.hpp"
#include "mcf/errors.hpp"
#include "mcf/graph.hpp"
#include "mcf/instance.hpp"

namespace mcf {

/// Flow of one source group, sparse and sorted by edge id.
struct SourceEdgeFlow {
  int group = 0;
  NodeId source = 0;
  std::vector<std::pair<EdgeId, double>> flows;

  std::vector<double> dense(EdgeId edge_count) const {
    std::vector<double> f(static_cast<std::size_t>(edge_count), 0.0);
    for (const auto& [e, x] : flows) f[static_cast<std::size_t>(e)] += x;
    return f;
  }
};

struct PathFlow {
  std::vector<EdgeId> edges;
  double amount = 0.0;
};

struct CommodityPathFlow {
  int commodity = 0;
  std::vector<PathFlow> paths;

  double total() const {
    double t = 0.0;
    for (const PathFlow& p : paths) t += p.amount;
    return t;
  }
};

inline std::vector<std::pair<EdgeId, double>> sparse_flows(std::span<const double> dense) {
  std::vector<std::pair<EdgeId, double>> out;
  for (std::size_t e = 0; e < dense.size(); ++e) {
    if (dense[e] != 0.0) out.emplace_back(static_cast<EdgeId>(e), dense[e]);
  }
  return out;
}

/// f^s_e from columns and their primal values (natural units: path x in flow,
/// tree x as the fraction of the group's demand).
inline std::vector<SourceEdgeFlow> columns_to_source_flows(const Instance& inst, std::span<const Column> columns,
                                                           std::span<const double> values) {
  if (columns.size() != values.size()) throw InputError("columns_to_source_flows: size mismatch");
  const auto m = inst.network().edge_count();
  std::vector<std::vector<double>> dense(inst.source_count(), std::vector<double>(static_cast<std::size_t>(m), 0.0));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const double x = values[c];
    if (x <= 0.0) continue;
    const Column& col = columns[c];
    const int g = col.kind == MasterMode::Path ? inst.group_of(col.owner) : col.owner;
    auto& f = dense[static_cast<std::size_t>(g)];
    for (std::size_t i = 0; i < col.edges.size(); ++i) f[static_cast<std::size_t>(col.edges[i])] += x * col.flows[i];
  }
  std::vector<SourceEdgeFlow> out(inst.source_count());
  for (std::size_t g = 0; g < out.size(); ++g) {
    out[g].group = static_cast<int>(g);
    out[g].source = inst.group(static_cast<int>(g)).source;
    out[g].flows = sparse_flows(dense[g]);
  }
  return out;
}

/// Sum over groups of per-edge flow.
inline std::vector<double> total_edge_flows(EdgeId edge_count, std::span<const SourceEdgeFlow> flows) {
  std::vector<double> f(static_cast<std::size_t>(edge_count), 0.0);
  for (const SourceEdgeFlow& s : flows) {
    for (const auto& [e, x] : s.flows) f[static_cast<std::size_t>(e)] += x;
  }
  return f;
}

namespace detail {

/// Cancels directed cycles in the positive part of `f` (entries <= tol are zeroed first).
inline void cancel_cycles(const Network& net, std::vector<double>& f, double tol) {
  for (double& x : f) {
    if (x <= tol) x = 0.0;
  }
  const auto n = static_cast<std::size_t>(net.node_count());
  while (true) {
    // Kahn peel; nodes left over lie on or behind a cycle.
    std::vector<int> indeg(n, 0);
    for (EdgeId e = 0; e < net.edge_count(); ++e) {
      if (f[static_cast<std::size_t>(e)] > 0.0) ++indeg[static_cast<std::size_t>(net.edge(e).head)];
    }
    std::vector<NodeId> stack;
    for (std::size_t v = 0; v < n; ++v) {
      if (indeg[v] == 0) stack.push_back(static_cast<NodeId>(v));
    }
    std::vector<char> removed(n, 0);
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      removed[static_cast<std::size_t>(v)] = 1;
      for (EdgeId e : net.out_edges(v)) {
        if (f[static_cast<std::size_t>(e)] <= 0.0) continue;
        if (--indeg[static_cast<std::size_t>(net.edge(e).head)] == 0) stack.push_back(net.edge(e).head);
      }
    }
    NodeId start = -1;
    for (std::size_t v = 0; v < n && start < 0; ++v) {
      if (!removed[v]) start = static_cast<NodeId>(v);
    }
    if (start < 0) return;
    // Every remaining node has a positive in-edge from a remaining node, so
    // walking backwards must revisit a node.
    std::vector<int> seen_at(n, -1);
    std::vector<EdgeId> walk;
    NodeId v = start;
    while (seen_at[static_cast<std::size_t>(v)] < 0) {
      seen_at[static_cast<std::size_t>(v)] = static_cast<int>(walk.size());
      EdgeId pick = kNoEdge;
      for (EdgeId e : net.in_edges(v)) {
        if (f[static_cast<std::size_t>(e)] > 0.0 && !removed[static_cast<std::size_t>(net.edge(e).tail)]) {
          pick = e;
          break;
        }
      }
      if (pick == kNoEdge) throw InternalError("cancel_cycles: dangling node in cycle search");
      walk.push_back(pick);
      v = net.edge(pick).tail;
    }
    const auto first = static_cast<std::size_t>(seen_at[static_cast<std::size_t>(v)]);
    double amount = std::numeric_limits<double>::infinity();
    for (std::size_t i = first; i < walk.size(); ++i) amount = std::min(amount, f[static_cast<std::size_t>(walk[i])]);
    for (std::size_t i = first; i < walk.size(); ++i) {
      double& x = f[static_cast<std::size_t>(walk[i])];
      x -= amount;
      if (x <= tol) x = 0.0;
    }
  }
}

/// Depth-first s-t path over edges with f > 0, smallest edge id first.
inline std::vector<EdgeId> find_flow_path(const Network& net, std::span<const double> f, NodeId s, NodeId t) {
  const auto n = static_cast<std::size_t>(net.node_count());
  std::vector<char> visited(n, 0);
  std::vector<std::pair<NodeId, std::size_t>> stack{{s, 0}};
  std::vector<EdgeId> path;
  visited[static_cast<std::size_t>(s)] = 1;
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (v == t) return path;
    const auto out = net.out_edges(v);
    bool advanced = false;
    while (next < out.size()) {
      const EdgeId e = out[next++];
      const NodeId w = net.edge(e).head;
      if (f[static_cast<std::size_t>(e)] <= 0.0 || visited[static_cast<std::size_t>(w)]) continue;
      visited[static_cast<std::size_t>(w)] = 1;
      path.push_back(e);
      stack.emplace_back(w, 0);
      advanced = true;
      break;
    }
    if (!advanced) {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
    }
  }
  return {};
}

}  // namespace detail

/// Splits one group's edge flow into paths per commodity. Cycles in the
/// support are canceled first; flows up to 1e-9 * group demand count as zero.
inline std::vector<CommodityPathFlow> decompose(const Instance& inst, const SourceEdgeFlow& flow) {
  const Network& net = inst.network();
  const SourceGroup& g = inst.group(flow.group);
  const double tol = 1e-9 * std::max(1.0, g.total_demand);
  std::vector<double> f = flow.dense(net.edge_count());
  for (const auto& [e, x] : flow.flows) {
    if (x < -tol) throw DecompositionError("decompose: negative flow on edge " + std::to_string(e));
  }
  detail::cancel_cycles(net, f, tol);

  std::vector<CommodityPathFlow> out;
  out.reserve(g.members.size());
  for (int k : g.members) {
    const Commodity& c = inst.commodity(k);
    CommodityPathFlow cp;
    cp.commodity = k;
    double remaining = c.demand;
    while (remaining > tol) {
      auto path = detail::find_flow_path(net, f, g.source, c.sink);
      if (path.empty()) {
        double in = 0.0, outf = 0.0;
        for (EdgeId e : net.in_edges(c.sink)) in += f[static_cast<std::size_t>(e)];
        for (EdgeId e : net.out_edges(c.sink)) outf += f[static_cast<std::size_t>(e)];
        throw DecompositionError("decompose: commodity " + std::to_string(k) + " misses " +
                                 std::to_string(remaining) + " units; residual balance at node " +
                                 std::to_string(c.sink) + " is " + std::to_string(in - outf));
      }
      double amount = remaining;
      for (EdgeId e : path) amount = std::min(amount, f[static_cast<std::size_t>(e)]);
      for (EdgeId e : path) {
        double& x = f[static_cast<std::size_t>(e)];
        x -= amount;
        if (x <= tol) x = 0.0;
      }
      remaining -= amount;
      cp.paths.push_back({std::move(path), amount});
    }
    out.push_back(std::move(cp));
  }
  double left = 0.0;
  for (double x : f) left = std::max(left, x);
  if (left > 1e-7 * std::max(1.0, g.total_demand)) {
    throw DecompositionError("decompose: " + std::to_string(left) + " units of flow left after all sinks were served");
  }
  return out;
}

/// Decomposes every group; result indexed by commodity id.
inline std::vector<CommodityPathFlow> decompose_all(const Instance& inst, std::span<const SourceEdgeFlow> flows) {
  std::vector<CommodityPathFlow> out(inst.commodity_count());
  for (const SourceEdgeFlow& s : flows) {
    for (CommodityPathFlow& cp : decompose(inst, s)) out[static_cast<std::size_t>(cp.commodity)] = std::move(cp);
  }
  return out;
}

/// One line per (commodity, path): `<k> <source> <sink> <amount> : <node> <node> ...`,
/// all ids 1-based as in the native instance format.
inline void write_flow_dump(std::ostream& out, const Instance& inst, std::span<const CommodityPathFlow> paths) {
  const Network& net = inst.network();
  out << "# commodity source sink amount : node path\n";
  out.precision(17);
  for (const CommodityPathFlow& cp : paths) {
    const Commodity& c = inst.commodity(cp.commodity);
    for (const PathFlow& p : cp.paths) {
      out << cp.commodity + 1 << ' ' << c.source + 1 << ' ' << c.sink + 1 << ' ' << p.amount << " :";
      out << ' ' << c.source + 1;
      for (EdgeId e : p.edges) out << ' ' << net.edge(e).head + 1;
      out << '\n';
    }
  }
}

}  // namespace mcf
