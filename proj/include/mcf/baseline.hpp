#pragma once
//
// Direct LPs: the edge-based model (a flow variable per commodity and edge)
// and the source-based model (a flow variable per source and edge). Both
// serve as comparison solvers and as oracles for the decomposed models.
//
// Naming scheme for exported LPs (1-based ids):
//   f_<owner>_<edge>   flow of commodity/source <owner> on edge <edge>
//   bal_<node>_<owner> flow balance of <owner> at <node>
//   cap_<edge>         capacity of <edge>
//

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mcf/decompose.hpp"
#include "mcf/errors.hpp"
#include "mcf/instance.hpp"
#include "mcf/lp.hpp"

namespace mcf {

enum class DirectKind { EdgeBased, SourceBased };

struct DirectLp {
  DirectKind kind = DirectKind::SourceBased;
  int owners = 0;       // commodities or sources
  EdgeId edges = 0;
  NodeId nodes = 0;
  LpProblem lp;

  int var(int owner, EdgeId e) const { return owner * edges + e; }
  int balance_row(int owner, NodeId v) const { return owner * nodes + v; }
  int capacity_row(EdgeId e) const { return owners * nodes + e; }
};

struct LpSize {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::size_t nonzeros = 0;      // constraint matrix
  std::size_t rhs_nonzeros = 0;

  /// Matrix plus right-hand-side nonzeros.
  std::size_t total_nonzeros() const noexcept { return nonzeros + rhs_nonzeros; }
};

namespace detail {

/// rhs(owner, node) supplied by the caller; the structure is shared.
template <class Rhs>
DirectLp build_direct(const Instance& inst, DirectKind kind, int owners, Rhs rhs, bool names) {
  const Network& net = inst.network();
  DirectLp d;
  d.kind = kind;
  d.owners = owners;
  d.edges = net.edge_count();
  d.nodes = net.node_count();
  LpProblem& lp = d.lp;
  for (int o = 0; o < owners; ++o) {
    for (EdgeId e = 0; e < net.edge_count(); ++e) {
      lp.add_col(net.edge(e).cost, names ? "f_" + std::to_string(o + 1) + "_" + std::to_string(e + 1) : "");
    }
  }
  for (int o = 0; o < owners; ++o) {
    for (NodeId v = 0; v < net.node_count(); ++v) {
      lp.add_row(RowSense::Equal, rhs(o, v), names ? "bal_" + std::to_string(v + 1) + "_" + std::to_string(o + 1) : "");
    }
  }
  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    lp.add_row(RowSense::LessEqual, net.edge(e).capacity, names ? "cap_" + std::to_string(e + 1) : "");
  }
  for (int o = 0; o < owners; ++o) {
    for (EdgeId e = 0; e < net.edge_count(); ++e) {
      const Edge& ed = net.edge(e);
      const int j = d.var(o, e);
      if (ed.tail != ed.head) {
        lp.add_entry(d.balance_row(o, ed.tail), j, 1.0);
        lp.add_entry(d.balance_row(o, ed.head), j, -1.0);
      }
      lp.add_entry(d.capacity_row(e), j, 1.0);
    }
  }
  return d;
}

}  // namespace detail

/// Balance rows: out - in = d_k at s_k, -d_k at t_k, 0 elsewhere.
inline DirectLp build_edge_lp(const Instance& inst, bool names = false) {
  const int owners = static_cast<int>(inst.commodity_count());
  return detail::build_direct(
      inst, DirectKind::EdgeBased, owners,
      [&](int k, NodeId v) {
        const Commodity& c = inst.commodity(k);
        if (v == c.source) return c.demand;
        if (v == c.sink) return -c.demand;
        return 0.0;
      },
      names);
}

/// Balance rows: out - in = total group demand at s, -d_k at each sink t_k.
inline DirectLp build_source_lp(const Instance& inst, bool names = false) {
  const int owners = static_cast<int>(inst.source_count());
  std::vector<std::vector<double>> rhs(inst.source_count());
  for (std::size_t g = 0; g < rhs.size(); ++g) {
    const SourceGroup& grp = inst.group(static_cast<int>(g));
    rhs[g].assign(static_cast<std::size_t>(inst.network().node_count()), 0.0);
    rhs[g][static_cast<std::size_t>(grp.source)] = grp.total_demand;
    for (const SinkDemand& sd : grp.sink_demands) rhs[g][static_cast<std::size_t>(sd.sink)] -= sd.demand;
  }
  return detail::build_direct(
      inst, DirectKind::SourceBased, owners,
      [&](int g, NodeId v) { return rhs[static_cast<std::size_t>(g)][static_cast<std::size_t>(v)]; }, names);
}

inline LpSize lp_size(const LpProblem& lp) {
  LpSize s;
  s.variables = static_cast<std::size_t>(lp.num_cols());
  s.constraints = static_cast<std::size_t>(lp.num_rows());
  s.nonzeros = lp.nonzeros();
  for (double b : lp.rhs) s.rhs_nonzeros += b != 0.0 ? 1 : 0;
  return s;
}

/// Size of the source-based LP computed without building it. Here
/// rhs_nonzeros counts balance rows only (one per source and one per sink).
inline LpSize source_lp_size(const Instance& inst) {
  const Network& net = inst.network();
  std::size_t loops = 0;
  for (const Edge& e : net.edges()) loops += e.tail == e.head ? 1 : 0;
  const std::size_t s = inst.source_count();
  const auto m = static_cast<std::size_t>(net.edge_count());
  LpSize z;
  z.variables = s * m;
  z.constraints = s * static_cast<std::size_t>(net.node_count()) + m;
  z.nonzeros = s * (3 * m - 2 * loops);
  for (const SourceGroup& g : inst.groups()) z.rhs_nonzeros += 1 + g.sink_demands.size();
  return z;
}

inline constexpr std::size_t kDefaultDirectNonzeroLimit = 2'000'000;

struct DirectResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<SourceEdgeFlow> source_flows;  // per source group
  std::size_t iterations = 0;
  LpSize size;
};

/// Solves a direct LP. Models above `max_nonzeros` are refused with a
/// CapacityError; pass a larger limit together with a backend that scales.
inline DirectResult solve_direct(const Instance& inst, const DirectLp& d, LpBackend& backend,
                                 std::size_t max_nonzeros = kDefaultDirectNonzeroLimit) {
  DirectResult r;
  r.size = lp_size(d.lp);
  if (r.size.nonzeros > max_nonzeros) {
    throw CapacityError("direct LP has " + std::to_string(r.size.nonzeros) + " nonzeros, above the limit of " +
                        std::to_string(max_nonzeros) + "; use an external backend or the decomposed formulations");
  }
  const LpSolution sol = backend.solve(d.lp);
  r.status = sol.status;
  r.iterations = sol.iterations;
  if (sol.status != LpStatus::Optimal) return r;
  r.objective = sol.objective;
  std::vector<std::vector<double>> dense(inst.source_count(),
                                         std::vector<double>(static_cast<std::size_t>(d.edges), 0.0));
  for (int o = 0; o < d.owners; ++o) {
    const int g = d.kind == DirectKind::EdgeBased ? inst.group_of(o) : o;
    for (EdgeId e = 0; e < d.edges; ++e) {
      dense[static_cast<std::size_t>(g)][static_cast<std::size_t>(e)] += sol.primal[static_cast<std::size_t>(d.var(o, e))];
    }
  }
  r.source_flows.resize(inst.source_count());
  for (std::size_t g = 0; g < dense.size(); ++g) {
    r.source_flows[g].group = static_cast<int>(g);
    r.source_flows[g].source = inst.group(static_cast<int>(g)).source;
    r.source_flows[g].flows = sparse_flows(dense[g]);
  }
  return r;
}

}  // namespace mcf
