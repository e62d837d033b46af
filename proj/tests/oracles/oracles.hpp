#pragma once
// Independent reference implementations used by the tests. None of them
// shares code with the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mcf/instance.hpp"
#include "mcf/lp.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Bellman-Ford distances from `s` (weights must not form negative cycles).
inline std::vector<double> bellman_ford(const mcf::Network& net, const std::vector<double>& w, mcf::NodeId s) {
  std::vector<double> d(static_cast<std::size_t>(net.node_count()), kInf);
  d[static_cast<std::size_t>(s)] = 0.0;
  for (mcf::NodeId round = 0; round < net.node_count(); ++round) {
    bool changed = false;
    for (mcf::EdgeId e = 0; e < net.edge_count(); ++e) {
      const auto& ed = net.edge(e);
      const double du = d[static_cast<std::size_t>(ed.tail)];
      if (du + w[static_cast<std::size_t>(e)] < d[static_cast<std::size_t>(ed.head)]) {
        d[static_cast<std::size_t>(ed.head)] = du + w[static_cast<std::size_t>(e)];
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d;
}

/// Minimum over every arborescence rooted at `root` that reaches all sinks of
/// sum_e f_e * w_e, where f_e is the demand routed through e. Each non-root
/// node picks one in-edge or none; choices that leave a sink cut off or close
/// a cycle are discarded. Exponential, meant for graphs of a handful of nodes.
inline double brute_force_tree(const mcf::Network& net, const std::vector<double>& w, mcf::NodeId root,
                               const std::vector<std::pair<mcf::NodeId, double>>& sinks) {
  const auto n = static_cast<std::size_t>(net.node_count());
  std::vector<std::vector<mcf::EdgeId>> options(n);
  for (std::size_t v = 0; v < n; ++v) {
    options[v].push_back(mcf::kNoEdge);
    if (static_cast<mcf::NodeId>(v) == root) continue;
    for (mcf::EdgeId e = 0; e < net.edge_count(); ++e) {
      if (net.edge(e).head == static_cast<mcf::NodeId>(v) && net.edge(e).tail != net.edge(e).head) options[v].push_back(e);
    }
  }
  std::vector<mcf::EdgeId> parent(n, mcf::kNoEdge);
  double best = kInf;
  std::function<void(std::size_t)> rec = [&](std::size_t v) {
    if (v == n) {
      double total = 0.0;
      for (const auto& [t, dem] : sinks) {
        mcf::NodeId x = t;
        std::size_t steps = 0;
        while (x != root) {
          const mcf::EdgeId e = parent[static_cast<std::size_t>(x)];
          if (e == mcf::kNoEdge || ++steps > n) return;
          total += dem * w[static_cast<std::size_t>(e)];
          x = net.edge(e).tail;
        }
      }
      best = std::min(best, total);
      return;
    }
    for (mcf::EdgeId e : options[v]) {
      parent[v] = e;
      rec(v + 1);
    }
  };
  rec(0);
  return best;
}

/// Optimum of an LP by enumerating every basis of its standard form
/// (slacks appended for inequality rows, x >= 0, no upper bounds).
/// nullopt when infeasible; unbounded problems are not detected.
inline std::optional<double> vertex_enumeration(const mcf::LpProblem& lp) {
  const int m = lp.num_rows();
  int slacks = 0;
  for (auto s : lp.senses) slacks += s == mcf::RowSense::Equal ? 0 : 1;
  const int n = lp.num_cols() + slacks;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd b(m), c = Eigen::VectorXd::Zero(n);
  for (const auto& e : lp.entries) A(e.row, e.col) += e.value;
  for (int j = 0; j < lp.num_cols(); ++j) c(j) = lp.objective[static_cast<std::size_t>(j)];
  int next = lp.num_cols();
  for (int i = 0; i < m; ++i) {
    b(i) = lp.rhs[static_cast<std::size_t>(i)];
    if (lp.senses[static_cast<std::size_t>(i)] == mcf::RowSense::LessEqual) A(i, next++) = 1.0;
    if (lp.senses[static_cast<std::size_t>(i)] == mcf::RowSense::GreaterEqual) A(i, next++) = -1.0;
  }
  // Drop linearly dependent rows.
  Eigen::FullPivLU<Eigen::MatrixXd> row_lu(A.transpose());
  const int rank = static_cast<int>(row_lu.rank());
  std::vector<int> keep;
  {
    Eigen::MatrixXd acc(0, n);
    for (int i = 0; i < m && static_cast<int>(keep.size()) < rank; ++i) {
      Eigen::MatrixXd trial(acc.rows() + 1, n);
      trial << acc, A.row(i);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(trial);
      if (lu.rank() == trial.rows()) {
        acc = trial;
        keep.push_back(i);
      }
    }
  }
  Eigen::MatrixXd Ar(static_cast<int>(keep.size()), n);
  Eigen::VectorXd br(static_cast<int>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    Ar.row(static_cast<int>(r)) = A.row(keep[r]);
    br(static_cast<int>(r)) = b(keep[r]);
  }
  const int mr = static_cast<int>(keep.size());
  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(mr));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == mr) {
      Eigen::MatrixXd B(mr, mr);
      Eigen::VectorXd cb(mr);
      for (int r = 0; r < mr; ++r) {
        B.col(r) = Ar.col(pick[static_cast<std::size_t>(r)]);
        cb(r) = c(pick[static_cast<std::size_t>(r)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
      if (lu.rank() < mr) return;
      const Eigen::VectorXd xb = lu.solve(br);
      if (xb.minCoeff() < -1e-9) return;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int r = 0; r < mr; ++r) x(pick[static_cast<std::size_t>(r)]) = xb(r);
      if ((A * x - b).cwiseAbs().maxCoeff() > 1e-7) return;
      const double z = cb.dot(xb);
      if (!best || z < *best) best = z;
      return;
    }
    for (int j = start; j <= n - (mr - depth); ++j) {
      pick[static_cast<std::size_t>(depth)] = j;
      rec(j + 1, depth + 1);
    }
  };
  if (mr == 0) return 0.0;
  rec(0, 0);
  return best;
}

}  // namespace oracle
