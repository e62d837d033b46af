#pragma once
//
// Column generation driver: RMP solves, lazy capacity rows and pricing,
// balanced by one of two strategies.
//
//   master_easy   violated rows are added and the RMP re-solved before any
//                 pricing; after new rows, only owners whose pooled columns
//                 cross those rows are priced until a filtered round yields
//                 fewer than epsilon columns.
//   pricing_easy  rows and columns are added in the same iteration; pricing
//                 stops once N columns are found, resuming at the next group.
//
// Stops when (UB - LB) / max(1, |UB|) <= rel_tol for a penalty-free,
// capacity-feasible RMP, or when a full pricing round finds nothing.
//

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcf/baseline.hpp"
#include "mcf/column.hpp"
#include "mcf/decompose.hpp"
#include "mcf/errors.hpp"
#include "mcf/instance.hpp"
#include "mcf/lp.hpp"
#include "mcf/master.hpp"
#include "mcf/pricing.hpp"
#include "mcf/simplex.hpp"

namespace mcf {

enum class Formulation { Tree, Path, SourceLp, EdgeLp };
enum class BalanceStrategy { Auto, MasterEasy, PricingEasy };
enum class SolveStatus { Optimal, Timeout, Infeasible };

inline const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::Tree: return "tree";
    case Formulation::Path: return "path";
    case Formulation::SourceLp: return "source-lp";
    case Formulation::EdgeLp: return "edge-lp";
  }
  return "?";
}

inline const char* to_string(BalanceStrategy s) {
  switch (s) {
    case BalanceStrategy::Auto: return "auto";
    case BalanceStrategy::MasterEasy: return "master-easy";
    case BalanceStrategy::PricingEasy: return "pricing-easy";
  }
  return "?";
}

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

inline std::optional<Formulation> parse_formulation(std::string_view s) {
  if (s == "tree") return Formulation::Tree;
  if (s == "path") return Formulation::Path;
  if (s == "source-lp") return Formulation::SourceLp;
  if (s == "edge-lp") return Formulation::EdgeLp;
  return std::nullopt;
}

inline std::optional<BalanceStrategy> parse_strategy(std::string_view s) {
  if (s == "auto") return BalanceStrategy::Auto;
  if (s == "master-easy" || s == "master_easy") return BalanceStrategy::MasterEasy;
  if (s == "pricing-easy" || s == "pricing_easy") return BalanceStrategy::PricingEasy;
  return std::nullopt;
}

inline std::optional<SolveStatus> parse_status(std::string_view s) {
  if (s == "optimal") return SolveStatus::Optimal;
  if (s == "timeout") return SolveStatus::Timeout;
  if (s == "infeasible") return SolveStatus::Infeasible;
  return std::nullopt;
}

struct SolverConfig {
  Formulation formulation = Formulation::Tree;
  double rel_tol = 1e-4;
  double timeout_seconds = 7200.0;
  BalanceStrategy strategy = BalanceStrategy::Auto;
  std::size_t column_threshold = 0;  // N; 0 selects max(|S|, 100)
  double filter_epsilon = -1.0;      // epsilon; negative selects max(|S|/100, 1)
  PricingStrategy pricing = PricingStrategy::Full;
  HeuristicScope heuristic = HeuristicScope::Global;
  int threads = 1;
  std::uint64_t seed = 0;
  MasterConfig master;
  double penalty_escalation = 1000.0;
  int max_escalations = 8;
  std::size_t max_iterations = 0;  // 0 = no limit
  std::size_t direct_nonzero_limit = kDefaultDirectNonzeroLimit;

  void validate() const {
    if (!(rel_tol > 0.0)) throw InputError("config: rel_tol must be positive");
    if (!(timeout_seconds > 0.0)) throw InputError("config: timeout must be positive");
    if (threads < 1) throw InputError("config: threads must be at least 1");
  }
};

struct IterationRecord {
  int iteration = 0;
  MasterPhase phase = MasterPhase::Optimality;
  double rmp_objective = 0.0;
  std::optional<double> round_bound;  // bound from this iteration's pricing
  std::optional<double> lower_bound;  // best so far
  std::size_t columns_added = 0;
  std::size_t rows_added = 0;
  std::size_t groups_priced = 0;
  std::size_t pricing_runs = 0;
  bool filtered = false;
  std::size_t pool_size = 0;
  int active_rows = 0;
  double penalty_flow = 0.0;
  std::size_t lp_iterations = 0;
  double elapsed = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::Timeout;
  Formulation formulation = Formulation::Tree;
  BalanceStrategy strategy = BalanceStrategy::Auto;
  SlackPolicy slack = SlackPolicy::Auto;
  double objective = std::numeric_limits<double>::quiet_NaN();  // upper bound
  std::optional<double> lower_bound;
  double gap = std::numeric_limits<double>::infinity();
  std::vector<IterationRecord> iterations;
  std::size_t peak_columns = 0;
  int final_active_rows = 0;
  int demand_rows = 0;
  std::vector<int> infeasible_commodities;
  std::string message;
  PricingStats pricing;
  std::size_t lp_iterations = 0;
  int escalations = 0;
  double wall_seconds = 0.0;
  std::vector<Column> columns;        // final pool (decomposed formulations)
  std::vector<double> column_values;  // natural units
  std::vector<SourceEdgeFlow> source_flows;
  LpSize direct_size;                 // direct formulations
};

inline double relative_gap(double ub, double lb) { return (ub - lb) / std::max(1.0, std::abs(ub)); }

/// pricing_easy when there are more commodities than nodes, else master_easy.
/// An explicit request is returned unchanged.
inline BalanceStrategy choose_strategy(const Instance& inst, BalanceStrategy requested = BalanceStrategy::Auto) {
  if (requested != BalanceStrategy::Auto) return requested;
  return inst.commodity_count() > static_cast<std::size_t>(inst.network().node_count()) ? BalanceStrategy::PricingEasy
                                                                                         : BalanceStrategy::MasterEasy;
}

class ColgenEngine {
 public:
  ColgenEngine(const Instance& inst, SolverConfig config, LpBackend& backend)
      : inst_(inst),
        config_(std::move(config)),
        backend_(backend),
        mode_(config_.formulation == Formulation::Path ? MasterMode::Path : MasterMode::Tree),
        master_(inst, mode_, config_.master) {
    config_.validate();
    if (config_.formulation != Formulation::Path && config_.formulation != Formulation::Tree) {
      throw InputError("ColgenEngine: direct formulations are solved by solve_direct");
    }
    const auto sources = inst.source_count();
    column_threshold_ = config_.column_threshold ? config_.column_threshold : std::max<std::size_t>(sources, 100);
    epsilon_ = config_.filter_epsilon >= 0 ? config_.filter_epsilon
                                           : std::max(static_cast<double>(sources) / 100.0, 1.0);
    strategy_ = choose_strategy(inst, config_.strategy);
    all_groups_.resize(sources);
    for (std::size_t g = 0; g < sources; ++g) all_groups_[g] = static_cast<int>(g);
    costs_ = inst.network().costs();
    zeros_.assign(costs_.size(), 0.0);
    penalty_tol_ = 1e-9 * (1.0 + inst.total_demand());
    report_.formulation = config_.formulation;
    report_.strategy = strategy_;
    report_.slack = master_.slack_policy();
    report_.demand_rows = master_.demand_rows();
    pricing_opt_.strategy = config_.pricing;
    pricing_opt_.scope = config_.heuristic;
    pricing_opt_.threads = config_.threads;
    if (mode_ == MasterMode::Path && config_.pricing == PricingStrategy::AStar) {
      cache_ = std::make_unique<HeuristicCache>(inst, config_.heuristic);
    }
  }

  const RestrictedMaster& master() const noexcept { return master_; }
  BalanceStrategy strategy() const noexcept { return strategy_; }
  std::size_t column_threshold() const noexcept { return column_threshold_; }
  double filter_epsilon() const noexcept { return epsilon_; }
  bool filter_active() const noexcept { return filter_on_; }
  bool done() const noexcept { return done_; }
  const SolveReport& report() const noexcept { return report_; }

  /// Seeds the pool with zero-dual columns; detects unreachable commodities.
  void initialize() {
    start_ = std::chrono::steady_clock::now();
    std::vector<int> unreachable;
    seed_columns(master_, &unreachable);
    if (!unreachable.empty()) {
      std::sort(unreachable.begin(), unreachable.end());
      finish(SolveStatus::Infeasible, "commodities without any source-sink path");
      report_.infeasible_commodities = std::move(unreachable);
    }
    initialized_ = true;
  }

  /// One iteration of the configured strategy. Returns false once finished.
  bool step() {
    if (!initialized_) initialize();
    if (done_) return false;
    if (strategy_ == BalanceStrategy::PricingEasy) {
      run_pricing_easy_iteration();
    } else {
      run_master_easy_iteration();
    }
    return !done_;
  }

  SolveReport run() {
    while (step()) {
    }
    return report_;
  }

  /// Re-solve before pricing whenever rows were added; filtered pricing after new rows.
  void run_master_easy_iteration() {
    IterationRecord rec;
    if (!begin_iteration(rec)) return;
    if (!violated_.empty()) {
      rec.rows_added = static_cast<std::size_t>(master_.add_capacity_rows(violated_));
      filter_edges_.insert(filter_edges_.end(), violated_.begin(), violated_.end());
      filter_on_ = true;
      end_iteration(rec);
      return;
    }
    std::vector<int> groups = all_groups_;
    bool filtered = false;
    if (filter_on_) {
      groups = groups_touching(filter_edges_);
      filtered = groups.size() < all_groups_.size();
    }
    rec.filtered = filtered;
    const RoundResult round = price(groups, std::numeric_limits<std::size_t>::max());
    rec.groups_priced = round.groups_priced;
    if (!filtered) bound_from(round, rec);
    rec.columns_added = add_columns(round);
    if (filter_on_ && static_cast<double>(rec.columns_added) < epsilon_) {
      filter_on_ = false;
      filter_edges_.clear();
    }
    end_iteration(rec);
    if (!filtered && rec.columns_added == 0) converged(rec);
  }

  /// Rows and columns in the same iteration; pricing stops after N columns.
  void run_pricing_easy_iteration() {
    IterationRecord rec;
    if (!begin_iteration(rec)) return;
    rec.rows_added = static_cast<std::size_t>(master_.add_capacity_rows(violated_));
    std::vector<int> order;
    order.reserve(all_groups_.size());
    for (std::size_t i = 0; i < all_groups_.size(); ++i) order.push_back(all_groups_[(cursor_ + i) % all_groups_.size()]);
    const RoundResult round = price(order, column_threshold_);
    rec.groups_priced = round.groups_priced;
    cursor_ = (cursor_ + round.groups_priced) % std::max<std::size_t>(1, all_groups_.size());
    const bool complete = round.groups_priced == all_groups_.size();
    if (complete) bound_from(round, rec);
    rec.columns_added = add_columns(round);
    end_iteration(rec);
    if (complete && rec.columns_added == 0 && rec.rows_added == 0) converged(rec);
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  /// Solves the RMP and checks the stopping rules. False when finished.
  bool begin_iteration(IterationRecord& rec) {
    if (elapsed() >= config_.timeout_seconds) {
      finish(SolveStatus::Timeout, "time limit reached");
      return false;
    }
    if (config_.max_iterations && report_.iterations.size() >= config_.max_iterations) {
      finish(SolveStatus::Timeout, "iteration limit reached");
      return false;
    }
    backend_.set_time_limit(std::max(0.0, config_.timeout_seconds - elapsed()));
    rmp_ = master_.solve(backend_);
    if (rmp_.status == LpStatus::TimeLimit) {
      finish(SolveStatus::Timeout, "time limit reached inside an LP solve");
      return false;
    }
    if (rmp_.status != LpStatus::Optimal) {
      throw InternalError(std::string("restricted master solve ended with status ") + to_string(rmp_.status));
    }
    report_.lp_iterations += rmp_.lp_iterations;
    rec.iteration = static_cast<int>(report_.iterations.size()) + 1;
    rec.phase = master_.phase();
    rec.rmp_objective = rmp_.objective;
    rec.penalty_flow = rmp_.penalty_flow;
    rec.lp_iterations = rmp_.lp_iterations;
    violated_ = master_.violated_capacities();
    const bool clean = master_.phase() == MasterPhase::Optimality && rmp_.penalty_flow <= penalty_tol_ && violated_.empty();
    if (clean) {
      best_ub_ = std::min(best_ub_, rmp_.objective);
      if (best_lb_ && relative_gap(rmp_.objective, *best_lb_) <= config_.rel_tol) {
        rec.lower_bound = best_lb_;
        end_iteration(rec);
        finish(SolveStatus::Optimal, "relative gap within tolerance");
        return false;
      }
    }
    return true;
  }

  void end_iteration(IterationRecord& rec) {
    rec.lower_bound = best_lb_;
    rec.pool_size = master_.column_count();
    rec.active_rows = master_.active_row_count();
    rec.elapsed = elapsed();
    report_.peak_columns = std::max(report_.peak_columns, master_.column_count());
    report_.iterations.push_back(rec);
  }

  std::vector<int> groups_touching(const std::vector<EdgeId>& edges) const {
    const std::vector<char> owners = master_.owners_touching(edges);
    std::vector<char> mark(all_groups_.size(), 0);
    for (std::size_t o = 0; o < owners.size(); ++o) {
      if (!owners[o]) continue;
      mark[static_cast<std::size_t>(mode_ == MasterMode::Path ? inst_.group_of(static_cast<int>(o)) : static_cast<int>(o))] = 1;
    }
    std::vector<int> out;
    for (std::size_t g = 0; g < mark.size(); ++g) {
      if (mark[g]) out.push_back(static_cast<int>(g));
    }
    return out;
  }

  RoundResult price(const std::vector<int>& groups, std::size_t limit) {
    const bool feas = master_.phase() == MasterPhase::Feasibility;
    const double tol = 1e-9 * (1.0 + std::abs(rmp_.objective));
    // The A* heuristic bounds raw costs, so it does not hold under the zero costs of a feasibility phase.
    PricingOptions opt = pricing_opt_;
    if (feas && opt.strategy == PricingStrategy::AStar) opt.strategy = PricingStrategy::Bounded;
    RoundResult r = price_round(inst_, mode_, rmp_.duals, feas ? zeros_ : costs_, groups, opt, cache_.get(), tol, limit);
    report_.pricing += r.stats;
    return r;
  }

  std::size_t add_columns(const RoundResult& round) {
    std::size_t added = 0;
    for (const Column& c : round.columns) added += master_.add_column(c).second ? 1 : 0;
    return added;
  }

  /// Lagrangian bound from a round that priced every owner.
  void bound_from(const RoundResult& round, IterationRecord& rec) {
    if (master_.phase() != MasterPhase::Optimality) return;
    double dual_value = 0.0;
    const int owners = master_.demand_rows();
    std::vector<double> weights(static_cast<std::size_t>(owners));
    for (int o = 0; o < owners; ++o) {
      const double rhs = owner_rhs(inst_, mode_, o);
      dual_value += rmp_.duals.pi[static_cast<std::size_t>(o)] * rhs;
      weights[static_cast<std::size_t>(o)] = rhs;
    }
    const Network& net = inst_.network();
    for (EdgeId e : master_.active_edges()) dual_value += rmp_.duals.mu[static_cast<std::size_t>(e)] * net.edge(e).capacity;
    const auto lb = lagrangian_bound(dual_value, round.bounds, weights);
    if (!lb) return;
    rec.round_bound = *lb;
    if (!best_lb_ || *lb > *best_lb_) best_lb_ = *lb;
  }

  /// A complete round found nothing and every capacity holds.
  void converged(IterationRecord& rec) {
    if (master_.phase() == MasterPhase::Feasibility) {
      if (rmp_.objective > penalty_tol_) {
        std::vector<int> ks;
        for (int o : master_.owners_with_penalty(penalty_tol_)) {
          if (mode_ == MasterMode::Path) {
            ks.push_back(o);
          } else {
            const auto& m = inst_.group(o).members;
            ks.insert(ks.end(), m.begin(), m.end());
          }
        }
        std::sort(ks.begin(), ks.end());
        report_.infeasible_commodities = std::move(ks);
        finish(SolveStatus::Infeasible, "demand cannot be routed within the capacities");
        return;
      }
      master_.set_phase(MasterPhase::Optimality);
      master_.scale_penalties(config_.penalty_escalation);
      ++report_.escalations;
      reset_filter();
      return;
    }
    if (rmp_.penalty_flow <= penalty_tol_) {
      best_ub_ = std::min(best_ub_, rmp_.objective);
      finish(SolveStatus::Optimal, "no column with negative reduced cost");
      return;
    }
    if (report_.escalations >= config_.max_escalations) {
      finish(SolveStatus::Infeasible, "penalty variables remain in use after repeated escalation");
      return;
    }
    master_.set_phase(MasterPhase::Feasibility);
    reset_filter();
    (void)rec;
  }

  void reset_filter() {
    filter_on_ = false;
    filter_edges_.clear();
  }

  void finish(SolveStatus status, std::string message) {
    done_ = true;
    report_.status = status;
    report_.message = std::move(message);
    report_.lower_bound = best_lb_;
    if (status == SolveStatus::Optimal) {
      report_.objective = rmp_.objective;
      // Pricing proved optimality; without a bound it coincides with the objective.
      if (!best_lb_) report_.lower_bound = rmp_.objective;
    } else if (std::isfinite(best_ub_)) {
      report_.objective = best_ub_;
    }
    if (report_.lower_bound && std::isfinite(report_.objective)) {
      report_.gap = std::max(0.0, relative_gap(report_.objective, *report_.lower_bound));
    }
    report_.final_active_rows = master_.active_row_count();
    report_.peak_columns = std::max(report_.peak_columns, master_.column_count());
    report_.columns.assign(master_.columns().begin(), master_.columns().end());
    report_.column_values.assign(master_.column_values().begin(), master_.column_values().end());
    report_.source_flows = columns_to_source_flows(inst_, report_.columns, report_.column_values);
    report_.wall_seconds = elapsed();
  }

  const Instance& inst_;
  SolverConfig config_;
  LpBackend& backend_;
  MasterMode mode_;
  RestrictedMaster master_;
  BalanceStrategy strategy_ = BalanceStrategy::MasterEasy;
  std::size_t column_threshold_ = 100;
  double epsilon_ = 1.0;
  PricingOptions pricing_opt_;
  std::unique_ptr<HeuristicCache> cache_;
  std::vector<int> all_groups_;
  std::vector<double> costs_, zeros_;
  double penalty_tol_ = 0.0;

  bool initialized_ = false;
  bool done_ = false;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
  RmpSolution rmp_;
  std::vector<EdgeId> violated_;
  std::vector<EdgeId> filter_edges_;
  bool filter_on_ = false;
  std::size_t cursor_ = 0;
  std::optional<double> best_lb_;
  double best_ub_ = std::numeric_limits<double>::infinity();
  SolveReport report_;
};

/// Solves `inst` with the configured formulation on `backend`.
inline SolveReport solve(const Instance& inst, const SolverConfig& config, LpBackend& backend) {
  config.validate();
  if (config.formulation == Formulation::Tree || config.formulation == Formulation::Path) {
    ColgenEngine engine(inst, config, backend);
    return engine.run();
  }
  const auto start = std::chrono::steady_clock::now();
  SolveReport rep;
  rep.formulation = config.formulation;
  rep.strategy = BalanceStrategy::Auto;
  const DirectLp d = config.formulation == Formulation::EdgeLp ? build_edge_lp(inst) : build_source_lp(inst);
  rep.demand_rows = d.lp.num_rows() - inst.network().edge_count();
  rep.final_active_rows = inst.network().edge_count();
  backend.set_time_limit(config.timeout_seconds);
  const DirectResult r = solve_direct(inst, d, backend, config.direct_nonzero_limit);
  rep.direct_size = r.size;
  rep.lp_iterations = r.iterations;
  switch (r.status) {
    case LpStatus::Optimal:
      rep.status = SolveStatus::Optimal;
      rep.objective = r.objective;
      rep.lower_bound = r.objective;
      rep.gap = 0.0;
      rep.source_flows = r.source_flows;
      rep.message = "direct LP solved";
      break;
    case LpStatus::Infeasible:
      rep.status = SolveStatus::Infeasible;
      rep.message = "direct LP is infeasible";
      break;
    case LpStatus::TimeLimit:
    case LpStatus::IterationLimit:
      rep.status = SolveStatus::Timeout;
      rep.message = std::string("direct LP stopped: ") + to_string(r.status);
      break;
    case LpStatus::Unbounded:
      throw InternalError("direct LP reported unbounded");
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// Solves with the built-in simplex backend.
inline SolveReport solve(const Instance& inst, const SolverConfig& config) {
  SimplexBackend backend;
  return solve(inst, config, backend);
}

}  // namespace mcf
