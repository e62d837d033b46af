#pragma once
//
// Restricted master problem shared by the path and tree decompositions.
//
// Rows: one demand row per owner (commodity in path mode, source group in tree
// mode) plus the capacity rows activated so far. Variables: pooled columns and
// penalty variables:
//   - demand slack on every demand row (demand policy),
//   - overflow on every active capacity row (both policies; under the demand
//     policy it only serves as a feasible warm start for a freshly added row),
//   - a demand artificial for an owner with no column yet (edge policy).
// Every demand row is normalized to right-hand side 1: a path column enters
// with coefficients d_k on its edges and cost d_k c_p, a tree column with its
// accumulated flows. Path rows are ordered by source group, so on instances
// with one commodity per source both masters build the same LP.
// Penalties are priced per unit of flow they stand in for.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mcf/column.hpp"
#include "mcf/errors.hpp"
#include "mcf/instance.hpp"
#include "mcf/lp.hpp"
#include "mcf/pricing.hpp"

namespace mcf {

enum class SlackPolicy { Auto, Demand, Edge };

inline const char* to_string(SlackPolicy p) {
  switch (p) {
    case SlackPolicy::Auto: return "auto";
    case SlackPolicy::Demand: return "demand";
    case SlackPolicy::Edge: return "edge";
  }
  return "?";
}

/// Optimality minimizes true cost plus big-M penalties. Feasibility zeroes
/// column costs and charges one per unit of penalized flow.
enum class MasterPhase { Optimality, Feasibility };

struct MasterConfig {
  SlackPolicy slack = SlackPolicy::Auto;
  std::vector<EdgeId> initial_rows;
  int retire_after = 0;  // consecutive nonbasic solves before a column leaves the LP; 0 = never
  bool validate_columns = true;
};

struct RmpSolution {
  LpStatus status = LpStatus::Optimal;
  double objective = 0.0;
  double dual_objective = 0.0;
  DualSnapshot duals;
  double penalty_flow = 0.0;  // flow units carried by penalty variables
  std::size_t lp_iterations = 0;
  int rows = 0;
  int cols = 0;
};

class RestrictedMaster {
 public:
  enum class VarKind { Column, DemandSlack, Artificial, Overflow };

  RestrictedMaster(const Instance& inst, MasterMode mode, MasterConfig config = {})
      : inst_(&inst), mode_(mode), config_(std::move(config)) {
    const Network& net = inst.network();
    owners_ = owner_count(inst, mode);
    policy_ = config_.slack;
    if (policy_ == SlackPolicy::Auto) policy_ = owners_ < net.edge_count() ? SlackPolicy::Demand : SlackPolicy::Edge;
    big_m_ = std::max(1.0, net.total_cost());
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (const Commodity& c : inst.commodities()) dmin = std::min(dmin, c.demand);
    for (const SourceGroup& g : inst.groups()) dmax = std::max(dmax, g.total_demand);
    spread_ = dmin > 0 ? std::max(1.0, dmax / dmin) : 1.0;
    row_of_owner_.assign(static_cast<std::size_t>(owners_), -1);
    int next_row = 0;
    if (mode == MasterMode::Path) {
      for (const SourceGroup& g : inst.groups()) {
        for (int k : g.members) row_of_owner_[static_cast<std::size_t>(k)] = next_row++;
      }
    } else {
      for (int o = 0; o < owners_; ++o) row_of_owner_[static_cast<std::size_t>(o)] = next_row++;
    }
    owner_of_row_.assign(static_cast<std::size_t>(owners_), -1);
    for (int o = 0; o < owners_; ++o) owner_of_row_[static_cast<std::size_t>(row_of_owner_[static_cast<std::size_t>(o)])] = o;
    row_of_edge_.assign(static_cast<std::size_t>(net.edge_count()), -1);
    overflow_of_edge_.assign(static_cast<std::size_t>(net.edge_count()), -1);
    artificial_of_owner_.assign(static_cast<std::size_t>(owners_), -1);
    owner_columns_.assign(static_cast<std::size_t>(owners_), 0);
    if (policy_ == SlackPolicy::Demand) {
      for (int r = 0; r < owners_; ++r) new_var(VarKind::DemandSlack, owner_of_row_[static_cast<std::size_t>(r)]);
    }
    add_capacity_rows(config_.initial_rows);
  }

  const Instance& instance() const noexcept { return *inst_; }
  MasterMode mode() const noexcept { return mode_; }
  SlackPolicy slack_policy() const noexcept { return policy_; }
  MasterPhase phase() const noexcept { return phase_; }
  void set_phase(MasterPhase p) noexcept { phase_ = p; }
  double big_m() const noexcept { return big_m_; }
  double penalty_scale() const noexcept { return penalty_scale_; }
  void scale_penalties(double factor) { penalty_scale_ *= factor; }

  int demand_rows() const noexcept { return owners_; }
  int active_row_count() const noexcept { return static_cast<int>(active_edges_.size()); }
  std::span<const EdgeId> active_edges() const noexcept { return active_edges_; }
  bool is_active(EdgeId e) const { return row_of_edge_[static_cast<std::size_t>(e)] >= 0; }

  std::size_t column_count() const noexcept { return columns_.size(); }
  const Column& column(int id) const { return columns_[static_cast<std::size_t>(id)]; }
  std::span<const Column> columns() const noexcept { return columns_; }
  /// Primal value per column id from the last solve.
  std::span<const double> column_values() const noexcept { return column_values_; }
  int columns_of_owner(int owner) const { return owner_columns_[static_cast<std::size_t>(owner)]; }

  /// Adds a column unless an identical one (same owner and support) is pooled.
  /// Returns (id, inserted).
  std::pair<int, bool> add_column(Column col) {
    if (col.kind != mode_) throw InternalError("add_column: column kind does not match the master");
    if (col.owner < 0 || col.owner >= owners_) {
      throw InternalError("add_column: owner " + std::to_string(col.owner) + " has no demand row");
    }
    if (config_.validate_columns) validate_column(*inst_, col);
    const std::uint64_t h = support_hash(col);
    auto& bucket = by_hash_[h];
    for (int id : bucket) {
      const Column& other = columns_[static_cast<std::size_t>(id)];
      if (other.owner == col.owner && other.edges == col.edges && same_flows(other.flows, col.flows)) {
        Var& v = vars_[static_cast<std::size_t>(var_of_column_[static_cast<std::size_t>(id)])];
        v.retired = false;
        v.idle = 0;
        return {id, false};
      }
    }
    const int id = static_cast<int>(columns_.size());
    ++owner_columns_[static_cast<std::size_t>(col.owner)];
    {
      const double scale = column_scale(col.owner);
      std::vector<std::pair<EdgeId, double>> coef;
      coef.reserve(col.edges.size());
      for (std::size_t i = 0; i < col.edges.size(); ++i) coef.emplace_back(col.edges[i], scale * col.flows[i]);
      std::sort(coef.begin(), coef.end());
      double c = 0.0;
      for (const auto& [e, a] : coef) c += a * inst_->network().edge(e).cost;
      lp_coef_.push_back(std::move(coef));
      lp_cost_.push_back(c);
    }
    columns_.push_back(std::move(col));
    column_values_.push_back(0.0);
    bucket.push_back(id);
    var_of_column_.push_back(new_var(VarKind::Column, id));
    return {id, true};
  }

  /// Activates capacity rows; already-active edges are skipped. Returns how many were added.
  int add_capacity_rows(std::span<const EdgeId> edges) {
    int added = 0;
    for (EdgeId e : edges) {
      if (!inst_->network().valid_edge(e)) throw InputError("add_capacity_rows: invalid edge " + std::to_string(e));
      if (is_active(e)) continue;
      row_of_edge_[static_cast<std::size_t>(e)] = owners_ + static_cast<int>(active_edges_.size());
      active_edges_.push_back(e);
      overflow_of_edge_[static_cast<std::size_t>(e)] = new_var(VarKind::Overflow, e);
      ++added;
    }
    return added;
  }

  /// Aggregate edge flow of the last primal.
  std::vector<double> edge_flows() const {
    std::vector<double> f(static_cast<std::size_t>(inst_->network().edge_count()), 0.0);
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      const double x = column_values_[c];
      if (x == 0.0) continue;
      const Column& col = columns_[c];
      for (std::size_t i = 0; i < col.edges.size(); ++i) f[static_cast<std::size_t>(col.edges[i])] += x * col.flows[i];
    }
    return f;
  }

  /// Edges whose flow exceeds capacity by more than 1e-6 + 1e-9 u_e, most violated first.
  std::vector<EdgeId> violated_capacities(std::span<const double> flows, bool include_active = false) const {
    const Network& net = inst_->network();
    std::vector<std::pair<double, EdgeId>> v;
    for (EdgeId e = 0; e < net.edge_count(); ++e) {
      if (!include_active && is_active(e)) continue;
      const double u = net.edge(e).capacity;
      const double over = flows[static_cast<std::size_t>(e)] - u;
      if (over > 1e-6 + 1e-9 * u) v.emplace_back(-over, e);
    }
    std::sort(v.begin(), v.end());
    std::vector<EdgeId> out;
    out.reserve(v.size());
    for (const auto& p : v) out.push_back(p.second);
    return out;
  }

  std::vector<EdgeId> violated_capacities() const { return violated_capacities(edge_flows()); }

  /// Flow units held by penalty variables in the last primal.
  double penalty_flow() const noexcept { return penalty_flow_; }

  /// Owners whose demand is partly covered by a penalty variable, or whose
  /// columns in the last primal cross an overflowing edge.
  std::vector<int> owners_with_penalty(double tol) const {
    std::vector<char> mark(static_cast<std::size_t>(owners_), 0);
    std::vector<char> over(static_cast<std::size_t>(inst_->network().edge_count()), 0);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      const Var& v = vars_[i];
      if (var_values_[i] * penalty_flow_factor(v) <= tol) continue;
      if (v.kind == VarKind::DemandSlack || v.kind == VarKind::Artificial) mark[static_cast<std::size_t>(v.ref)] = 1;
      if (v.kind == VarKind::Overflow) over[static_cast<std::size_t>(v.ref)] = 1;
    }
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (column_values_[c] <= 0.0) continue;
      for (EdgeId e : columns_[c].edges) {
        if (over[static_cast<std::size_t>(e)]) mark[static_cast<std::size_t>(columns_[c].owner)] = 1;
      }
    }
    std::vector<int> out;
    for (int o = 0; o < owners_; ++o) {
      if (mark[static_cast<std::size_t>(o)]) out.push_back(o);
    }
    return out;
  }

  /// Owners with a pooled column crossing any of `edges`.
  std::vector<char> owners_touching(std::span<const EdgeId> edges) const {
    std::vector<char> hit(static_cast<std::size_t>(inst_->network().edge_count()), 0);
    for (EdgeId e : edges) hit[static_cast<std::size_t>(e)] = 1;
    std::vector<char> mark(static_cast<std::size_t>(owners_), 0);
    for (const Column& col : columns_) {
      if (mark[static_cast<std::size_t>(col.owner)]) continue;
      for (EdgeId e : col.edges) {
        if (hit[static_cast<std::size_t>(e)]) {
          mark[static_cast<std::size_t>(col.owner)] = 1;
          break;
        }
      }
    }
    return mark;
  }

  /// The current restriction as an LP (rows: demand rows then active capacity rows).
  LpProblem build_lp(bool with_names = false) const {
    LpProblem lp;
    for (int r = 0; r < owners_; ++r) {
      lp.add_row(RowSense::Equal, 1.0, with_names ? "dem_" + std::to_string(owner_of_row_[static_cast<std::size_t>(r)] + 1) : "");
    }
    for (EdgeId e : active_edges_) {
      lp.add_row(RowSense::LessEqual, inst_->network().edge(e).capacity,
                 with_names ? "cap_" + std::to_string(e + 1) : "");
    }
    lp_col_of_var_.assign(vars_.size(), -1);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      const Var& v = vars_[i];
      if (v.retired) continue;
      const int j = lp.add_col(var_cost(v), with_names ? var_name(v) : "");
      lp_col_of_var_[i] = j;
      switch (v.kind) {
        case VarKind::Column: {
          const Column& col = columns_[static_cast<std::size_t>(v.ref)];
          lp.add_entry(row_of_owner_[static_cast<std::size_t>(col.owner)], j, 1.0);
          for (const auto& [e, a] : lp_coef_[static_cast<std::size_t>(v.ref)]) {
            const int r = row_of_edge_[static_cast<std::size_t>(e)];
            if (r >= 0) lp.add_entry(r, j, a);
          }
          break;
        }
        case VarKind::DemandSlack:
        case VarKind::Artificial:
          lp.add_entry(row_of_owner_[static_cast<std::size_t>(v.ref)], j, 1.0);
          break;
        case VarKind::Overflow:
          lp.add_entry(row_of_edge_[static_cast<std::size_t>(v.ref)], j, -1.0);
          break;
      }
    }
    return lp;
  }

  RmpSolution solve(LpBackend& backend) {
    ensure_coverable();
    const LpProblem lp = build_lp();
    const LpBasis warm = warm_basis();
    const bool use_warm = backend.capabilities().warm_start && have_basis_;
    const LpSolution sol = backend.solve(lp, use_warm ? &warm : nullptr);

    RmpSolution out;
    out.status = sol.status;
    out.lp_iterations = sol.iterations;
    out.rows = lp.num_rows();
    out.cols = lp.num_cols();
    if (sol.status == LpStatus::Infeasible || sol.status == LpStatus::Unbounded) {
      throw InternalError(std::string("restricted master reported ") + to_string(sol.status));
    }
    if (sol.status != LpStatus::Optimal) return out;

    out.objective = sol.objective;
    out.dual_objective = sol.dual_objective;
    const bool negated = backend.capabilities().dual_sign == DualSign::Negated;
    out.duals.pi.resize(static_cast<std::size_t>(owners_));
    for (int o = 0; o < owners_; ++o) {
      const double y = sol.duals[static_cast<std::size_t>(row_of_owner_[static_cast<std::size_t>(o)])];
      out.duals.pi[static_cast<std::size_t>(o)] = (negated ? -y : y) / column_scale(o);
    }
    out.duals.mu.assign(static_cast<std::size_t>(inst_->network().edge_count()), 0.0);
    for (std::size_t r = 0; r < active_edges_.size(); ++r) {
      const double y = sol.duals[static_cast<std::size_t>(owners_) + r];
      out.duals.mu[static_cast<std::size_t>(active_edges_[r])] = std::min(0.0, negated ? -y : y);
    }

    var_values_.assign(vars_.size(), 0.0);
    std::vector<char> basic(vars_.size(), 0);
    std::vector<int> var_of_lp_col(static_cast<std::size_t>(lp.num_cols()), -1);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (lp_col_of_var_[i] >= 0) var_of_lp_col[static_cast<std::size_t>(lp_col_of_var_[i])] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (lp_col_of_var_[i] >= 0) var_values_[i] = std::max(0.0, sol.primal[static_cast<std::size_t>(lp_col_of_var_[i])]);
    }
    penalty_flow_ = 0.0;
    for (std::size_t i = 0; i < vars_.size(); ++i) penalty_flow_ += var_values_[i] * penalty_flow_factor(vars_[i]);
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      column_values_[c] = var_values_[static_cast<std::size_t>(var_of_column_[c])] * column_scale(columns_[c].owner);
    }
    out.penalty_flow = penalty_flow_;

    have_basis_ = !sol.basis.basic_cols.empty() || !sol.basis.basic_row_slacks.empty();
    basis_vars_.clear();
    basis_slack_edges_.clear();
    for (int j : sol.basis.basic_cols) {
      const int v = var_of_lp_col[static_cast<std::size_t>(j)];
      basis_vars_.push_back(v);
      basic[static_cast<std::size_t>(v)] = 1;
    }
    for (int r : sol.basis.basic_row_slacks) {
      if (r >= owners_) basis_slack_edges_.push_back(active_edges_[static_cast<std::size_t>(r - owners_)]);
    }
    basis_rows_ = active_row_count();
    if (config_.retire_after > 0) {
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        Var& v = vars_[i];
        if (v.kind != VarKind::Column || v.retired) continue;
        v.idle = basic[i] ? 0 : v.idle + 1;
        if (v.idle >= config_.retire_after) v.retired = true;
      }
    }
    return out;
  }

 private:
  struct Var {
    VarKind kind;
    int ref;  // column id, owner, or edge
    bool retired = false;
    int idle = 0;
  };

  static bool same_flows(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
    }
    return true;
  }

  /// Factor between a column's natural units and its LP variable.
  double column_scale(int owner) const { return mode_ == MasterMode::Path ? inst_->commodity(owner).demand : 1.0; }

  int new_var(VarKind kind, int ref) {
    vars_.push_back({kind, ref});
    var_values_.push_back(0.0);
    if (kind == VarKind::Artificial) artificial_of_owner_[static_cast<std::size_t>(ref)] = static_cast<int>(vars_.size()) - 1;
    return static_cast<int>(vars_.size()) - 1;
  }

  double penalty_flow_factor(const Var& v) const {
    switch (v.kind) {
      case VarKind::Column: return 0.0;
      case VarKind::DemandSlack:
      case VarKind::Artificial: return owner_flow(*inst_, mode_, v.ref);
      case VarKind::Overflow: return 1.0;
    }
    return 0.0;
  }

  double var_cost(const Var& v) const {
    if (phase_ == MasterPhase::Feasibility) {
      return v.kind == VarKind::Column ? 0.0 : penalty_flow_factor(v);
    }
    const double m = big_m_ * penalty_scale_;
    switch (v.kind) {
      case VarKind::Column: return lp_cost_[static_cast<std::size_t>(v.ref)];
      case VarKind::DemandSlack: return m * owner_flow(*inst_, mode_, v.ref);
      case VarKind::Artificial: return 10.0 * m * owner_flow(*inst_, mode_, v.ref);
      case VarKind::Overflow: return (policy_ == SlackPolicy::Demand ? 10.0 : 1.0) * m * spread_;
    }
    return 0.0;
  }

  std::string var_name(const Var& v) const {
    switch (v.kind) {
      case VarKind::Column: return "x_" + std::to_string(v.ref + 1);
      case VarKind::DemandSlack: return "slack_" + std::to_string(v.ref + 1);
      case VarKind::Artificial: return "art_" + std::to_string(v.ref + 1);
      case VarKind::Overflow: return "over_" + std::to_string(v.ref + 1);
    }
    return "?";
  }

  /// Under the edge policy an owner without columns gets an artificial.
  void ensure_coverable() {
    if (policy_ != SlackPolicy::Edge) return;
    for (int r = 0; r < owners_; ++r) {
      const int o = owner_of_row_[static_cast<std::size_t>(r)];
      if (owner_columns_[static_cast<std::size_t>(o)] == 0 && artificial_of_owner_[static_cast<std::size_t>(o)] < 0) {
        new_var(VarKind::Artificial, o);
      }
    }
  }

  /// Last basis, extended by one basic variable per capacity row added since.
  LpBasis warm_basis() const {
    LpBasis b;
    if (!have_basis_) return b;
    // lp_col_of_var_ is refreshed by build_lp before this is called.
    for (int v : basis_vars_) {
      const int j = lp_col_of_var_[static_cast<std::size_t>(v)];
      if (j < 0) return {};
      b.basic_cols.push_back(j);
    }
    for (EdgeId e : basis_slack_edges_) b.basic_row_slacks.push_back(row_of_edge_[static_cast<std::size_t>(e)]);
    if (basis_rows_ < active_row_count()) {
      const auto flows = edge_flows();
      for (std::size_t r = static_cast<std::size_t>(basis_rows_); r < active_edges_.size(); ++r) {
        const EdgeId e = active_edges_[r];
        if (flows[static_cast<std::size_t>(e)] > inst_->network().edge(e).capacity) {
          b.basic_cols.push_back(lp_col_of_var_[static_cast<std::size_t>(overflow_of_edge_[static_cast<std::size_t>(e)])]);
        } else {
          b.basic_row_slacks.push_back(row_of_edge_[static_cast<std::size_t>(e)]);
        }
      }
    }
    return b;
  }

  const Instance* inst_;
  MasterMode mode_;
  MasterConfig config_;
  SlackPolicy policy_ = SlackPolicy::Demand;
  MasterPhase phase_ = MasterPhase::Optimality;
  int owners_ = 0;
  double big_m_ = 1.0;
  double spread_ = 1.0;
  double penalty_scale_ = 1.0;

  std::vector<Column> columns_;
  std::vector<double> column_values_;
  std::vector<int> var_of_column_;
  std::vector<int> owner_columns_;
  std::vector<std::vector<std::pair<EdgeId, double>>> lp_coef_;
  std::vector<double> lp_cost_;
  std::vector<int> row_of_owner_, owner_of_row_;
  std::unordered_map<std::uint64_t, std::vector<int>> by_hash_;

  std::vector<Var> vars_;
  std::vector<double> var_values_;
  mutable std::vector<int> lp_col_of_var_;
  std::vector<int> artificial_of_owner_;
  std::vector<int> overflow_of_edge_;

  std::vector<EdgeId> active_edges_;
  std::vector<int> row_of_edge_;

  bool have_basis_ = false;
  std::vector<int> basis_vars_;
  std::vector<EdgeId> basis_slack_edges_;
  int basis_rows_ = 0;
  double penalty_flow_ = 0.0;
};

/// Columns from one pricing round at zero duals: a shortest path per commodity
/// or a shortest-path tree per source. Returns the number of columns added and
/// appends unreachable commodities to `unreachable`.
inline std::size_t seed_columns(RestrictedMaster& master, std::vector<int>* unreachable = nullptr) {
  const Instance& inst = master.instance();
  DualSnapshot duals;
  duals.pi.assign(static_cast<std::size_t>(master.demand_rows()), std::numeric_limits<double>::max());
  duals.mu.assign(static_cast<std::size_t>(inst.network().edge_count()), 0.0);
  std::vector<int> groups(inst.source_count());
  for (std::size_t g = 0; g < groups.size(); ++g) groups[g] = static_cast<int>(g);
  const auto costs = inst.network().costs();
  const RoundResult r = price_round(inst, master.mode(), duals, costs, groups, PricingOptions{}, nullptr, 0.0);
  std::size_t added = 0;
  for (const Column& c : r.columns) added += master.add_column(c).second ? 1 : 0;
  if (unreachable) unreachable->insert(unreachable->end(), r.unreachable.begin(), r.unreachable.end());
  return added;
}

/// A master with its demand rows, slack variables and configured initial rows.
/// Under the edge-slack policy it is seeded with one column per pricing problem.
inline RestrictedMaster new_master(const Instance& inst, MasterMode mode, MasterConfig config = {}) {
  RestrictedMaster m(inst, mode, std::move(config));
  if (m.slack_policy() == SlackPolicy::Edge) seed_columns(m);
  return m;
}

inline std::pair<int, bool> add_column(RestrictedMaster& m, Column col) { return m.add_column(std::move(col)); }

inline RmpSolution solve_rmp(RestrictedMaster& m, LpBackend& backend) { return m.solve(backend); }

inline std::vector<EdgeId> violated_capacities(const RestrictedMaster& m) { return m.violated_capacities(); }

inline int add_capacity_rows(RestrictedMaster& m, std::span<const EdgeId> edges) { return m.add_capacity_rows(edges); }

}  // namespace mcf
