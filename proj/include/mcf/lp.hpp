#pragma once
//
// Sparse LP interchange structure shared by every backend:
//
//   minimize    c^T x
//   subject to  a_i^T x  (=, <=, >=)  b_i     for each row i
//               0 <= x_j <= upper_j           (upper_j defaults to +inf)
//
// Coefficients are (row, col, value) triplets. Duals follow the minimization
// convention: reduced costs c - A^T y are nonnegative at optimality, so a <=
// row has y_i <= 0 and a >= row has y_i >= 0.
//

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mcf/errors.hpp"

namespace mcf {

enum class RowSense { Equal, LessEqual, GreaterEqual };

struct LpEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct LpProblem {
  std::vector<double> objective;
  std::vector<double> col_upper;  // empty, or one entry per column (+inf = unbounded)
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  std::vector<LpEntry> entries;
  std::vector<std::string> row_names;  // optional
  std::vector<std::string> col_names;  // optional

  int num_rows() const noexcept { return static_cast<int>(rhs.size()); }
  int num_cols() const noexcept { return static_cast<int>(objective.size()); }
  std::size_t nonzeros() const noexcept { return entries.size(); }

  int add_row(RowSense sense, double b, std::string name = {}) {
    senses.push_back(sense);
    rhs.push_back(b);
    if (!name.empty() || !row_names.empty()) {
      row_names.resize(rhs.size() - 1);
      row_names.push_back(std::move(name));
    }
    return num_rows() - 1;
  }

  int add_col(double cost, std::string name = {}) {
    objective.push_back(cost);
    if (!col_upper.empty()) col_upper.push_back(std::numeric_limits<double>::infinity());
    if (!name.empty() || !col_names.empty()) {
      col_names.resize(objective.size() - 1);
      col_names.push_back(std::move(name));
    }
    return num_cols() - 1;
  }

  void add_entry(int row, int col, double value) {
    if (value != 0.0) entries.push_back({row, col, value});
  }

  void validate() const {
    if (senses.size() != rhs.size()) throw InputError("lp: senses/rhs size mismatch");
    if (!col_upper.empty() && col_upper.size() != objective.size()) throw InputError("lp: col_upper size mismatch");
    for (const LpEntry& e : entries) {
      if (e.row < 0 || e.row >= num_rows() || e.col < 0 || e.col >= num_cols()) throw InputError("lp: entry out of range");
      if (!std::isfinite(e.value)) throw InputError("lp: non-finite coefficient");
    }
    for (double c : objective) {
      if (!std::isfinite(c)) throw InputError("lp: non-finite objective coefficient");
    }
    for (double b : rhs) {
      if (!std::isfinite(b)) throw InputError("lp: non-finite right-hand side");
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    case LpStatus::TimeLimit: return "time_limit";
  }
  return "?";
}

/// A basis expressed in problem terms: basic structural columns plus the
/// rows whose logical (slack) variable is basic. Only inequality rows have one.
struct LpBasis {
  std::vector<int> basic_cols;
  std::vector<int> basic_row_slacks;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<double> primal;  // per column
  std::vector<double> duals;   // per row
  LpBasis basis;               // empty when the backend does not report one
  std::size_t iterations = 0;
};

enum class DualSign {
  Minimization,  // <= rows carry nonpositive duals
  Negated,       // every dual has the opposite sign
};

struct BackendCapabilities {
  bool warm_start = false;
  DualSign dual_sign = DualSign::Minimization;
  std::string method;
};

class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual BackendCapabilities capabilities() const = 0;
  /// `warm` is a hint; backends may ignore it.
  virtual LpSolution solve(const LpProblem& lp, const LpBasis* warm = nullptr) = 0;
  /// Wall-clock budget for subsequent solves; backends without one ignore it.
  virtual void set_time_limit(double /*seconds*/) {}
};

/// Writes `lp` in CPLEX LP text layout. Unnamed rows/columns get r<i>/x<j>.
inline void write_lp_format(std::ostream& out, const LpProblem& lp) {
  auto col_name = [&](int j) {
    return j < static_cast<int>(lp.col_names.size()) && !lp.col_names[static_cast<std::size_t>(j)].empty()
               ? lp.col_names[static_cast<std::size_t>(j)]
               : "x" + std::to_string(j);
  };
  auto row_name = [&](int i) {
    return i < static_cast<int>(lp.row_names.size()) && !lp.row_names[static_cast<std::size_t>(i)].empty()
               ? lp.row_names[static_cast<std::size_t>(i)]
               : "r" + std::to_string(i);
  };
  auto term = [&](std::ostream& o, double v, int j, bool first) {
    if (v < 0) {
      o << (first ? "- " : " - ");
    } else if (!first) {
      o << " + ";
    }
    const double a = std::abs(v);
    if (a != 1.0) o << a << ' ';
    o << col_name(j);
  };
  out.precision(17);
  out << "\\ minimum-cost multi-commodity flow LP\nMinimize\n obj:";
  bool first = true;
  int on_line = 0;
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (lp.objective[static_cast<std::size_t>(j)] == 0.0) continue;
    out << ' ';
    term(out, lp.objective[static_cast<std::size_t>(j)], j, first);
    first = false;
    if (++on_line % 8 == 0) out << "\n     ";
  }
  if (first) out << " 0 " << col_name(0);
  out << "\nSubject To\n";
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(lp.num_rows()));
  for (const LpEntry& e : lp.entries) rows[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.value);
  for (int i = 0; i < lp.num_rows(); ++i) {
    out << ' ' << row_name(i) << ':';
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (r.empty()) out << " 0 " << col_name(0);
    for (std::size_t t = 0; t < r.size(); ++t) {
      out << ' ';
      term(out, r[t].second, r[t].first, t == 0);
      if ((t + 1) % 8 == 0 && t + 1 < r.size()) out << "\n  ";
    }
    switch (lp.senses[static_cast<std::size_t>(i)]) {
      case RowSense::Equal: out << " = "; break;
      case RowSense::LessEqual: out << " <= "; break;
      case RowSense::GreaterEqual: out << " >= "; break;
    }
    out << lp.rhs[static_cast<std::size_t>(i)] << "\n";
  }
  bool any_upper = false;
  for (double u : lp.col_upper) any_upper = any_upper || std::isfinite(u);
  if (any_upper) {
    out << "Bounds\n";
    for (int j = 0; j < lp.num_cols(); ++j) {
      const double u = lp.col_upper[static_cast<std::size_t>(j)];
      if (std::isfinite(u)) out << " 0 <= " << col_name(j) << " <= " << u << "\n";
    }
  }
  out << "End\n";
}

}  // namespace mcf
