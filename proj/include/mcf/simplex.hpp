#pragma once
//
// Built-in LP backend: two-phase revised primal simplex over a sparse LU of
// the basis (Eigen SparseLU) with product-form eta updates between
// refactorizations. Pricing is Dantzig's rule with a Harris two-pass ratio
// test; after a run of degenerate pivots it falls back to Bland's rule until
// the objective moves again, which rules out cycling.
//
// Intended for desk-scale problems. Accepts a warm-start basis and skips
// phase 1 when that basis is primal feasible.
//

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "mcf/errors.hpp"
#include "mcf/lp.hpp"

namespace mcf {

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_interval = 64;
  int degenerate_pivots_before_bland = 50;
  std::size_t max_iterations = 0;  // 0 picks a limit from the problem size
  double time_limit_seconds = std::numeric_limits<double>::infinity();
};

namespace detail {

class RevisedSimplex {
 public:
  RevisedSimplex(const LpProblem& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) { setup(); }

  LpSolution run(const LpBasis* warm) {
    start_ = std::chrono::steady_clock::now();
    LpSolution sol;
    if (m_ == 0) return solve_without_rows();

    for (int attempt = 0; attempt < 3; ++attempt) {
      bool warm_ok = attempt == 0 && warm && try_warm_start(*warm);
      if (!warm_ok) cold_start();
      recovering_ = false;

      if (!warm_ok && any_artificial_basic()) {
        const LpStatus s1 = iterate(/*phase=*/1);
        if (recovering_) continue;
        if (s1 != LpStatus::Optimal) return finish(s1);
        double infeas = 0.0;
        for (int i = 0; i < m_; ++i) {
          if (is_artificial(basis_[static_cast<std::size_t>(i)])) infeas += x_[static_cast<std::size_t>(i)];
        }
        if (infeas > 1e-7 * (1.0 + b_scale_)) return finish(LpStatus::Infeasible);
        drive_out_artificials();
        if (recovering_) continue;
      }
      const LpStatus s2 = iterate(/*phase=*/2);
      if (recovering_) continue;
      return finish(s2);
    }
    throw InternalError("simplex: repeated loss of numerical stability");
  }

 private:
  struct Eta {
    int r = 0;
    double pivot_inv = 1.0;
    std::vector<std::pair<int, double>> others;
  };

  // ---- setup -------------------------------------------------------------

  void setup() {
    lp_.validate();
    n_ = lp_.num_cols();
    const int m0 = lp_.num_rows();
    rows_orig_ = m0;
    std::vector<RowSense> sense(lp_.senses.begin(), lp_.senses.end());
    std::vector<double> b(lp_.rhs.begin(), lp_.rhs.end());
    std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n_));
    for (const LpEntry& e : lp_.entries) cols[static_cast<std::size_t>(e.col)].emplace_back(e.row, e.value);
    if (!lp_.col_upper.empty()) {
      for (int j = 0; j < n_; ++j) {
        const double u = lp_.col_upper[static_cast<std::size_t>(j)];
        if (!std::isfinite(u)) continue;
        if (u < 0) throw InputError("lp: negative column upper bound");
        sense.push_back(RowSense::LessEqual);
        b.push_back(u);
        cols[static_cast<std::size_t>(j)].emplace_back(static_cast<int>(b.size()) - 1, 1.0);
        has_bound_rows_ = true;
      }
    }
    m_ = static_cast<int>(b.size());
    flip_.assign(static_cast<std::size_t>(m_), 0);
    for (int i = 0; i < m_; ++i) {
      if (b[static_cast<std::size_t>(i)] < 0) {
        flip_[static_cast<std::size_t>(i)] = 1;
        b[static_cast<std::size_t>(i)] = -b[static_cast<std::size_t>(i)];
        auto& s = sense[static_cast<std::size_t>(i)];
        if (s == RowSense::LessEqual) s = RowSense::GreaterEqual;
        else if (s == RowSense::GreaterEqual) s = RowSense::LessEqual;
      }
    }
    b_ = std::move(b);
    b_scale_ = 0.0;
    for (double v : b_) b_scale_ = std::max(b_scale_, std::abs(v));

    // Column layout: structural | slack (one per inequality row) | artificial (one per row).
    col_start_.assign(1, 0);
    cost_.clear();
    for (int j = 0; j < n_; ++j) {
      auto& c = cols[static_cast<std::size_t>(j)];
      std::sort(c.begin(), c.end());
      for (auto [i, v] : c) {
        row_idx_.push_back(i);
        val_.push_back(flip_[static_cast<std::size_t>(i)] ? -v : v);
      }
      col_start_.push_back(static_cast<int>(row_idx_.size()));
      cost_.push_back(lp_.objective[static_cast<std::size_t>(j)]);
    }
    slack_of_row_.assign(static_cast<std::size_t>(m_), -1);
    for (int i = 0; i < m_; ++i) {
      const RowSense s = sense[static_cast<std::size_t>(i)];
      if (s == RowSense::Equal) continue;
      slack_of_row_[static_cast<std::size_t>(i)] = static_cast<int>(cost_.size());
      row_idx_.push_back(i);
      val_.push_back(s == RowSense::LessEqual ? 1.0 : -1.0);
      col_start_.push_back(static_cast<int>(row_idx_.size()));
      cost_.push_back(0.0);
    }
    first_artificial_ = static_cast<int>(cost_.size());
    for (int i = 0; i < m_; ++i) {
      row_idx_.push_back(i);
      val_.push_back(1.0);
      col_start_.push_back(static_cast<int>(row_idx_.size()));
      cost_.push_back(0.0);
    }
    total_cols_ = static_cast<int>(cost_.size());
    pos_.assign(static_cast<std::size_t>(total_cols_), -1);
    basis_.assign(static_cast<std::size_t>(m_), -1);
    x_.assign(static_cast<std::size_t>(m_), 0.0);
    max_iter_ = opt_.max_iterations ? opt_.max_iterations
                                    : 50 * static_cast<std::size_t>(m_ + total_cols_) + 10000;
  }

  bool is_artificial(int j) const { return j >= first_artificial_; }

  double phase_cost(int j, int phase) const {
    if (phase == 1) return is_artificial(j) ? 1.0 : 0.0;
    return is_artificial(j) ? 0.0 : cost_[static_cast<std::size_t>(j)];
  }

  LpSolution solve_without_rows() {
    LpSolution sol;
    sol.primal.assign(static_cast<std::size_t>(n_), 0.0);
    sol.status = LpStatus::Optimal;
    for (int j = 0; j < n_; ++j) {
      if (cost_[static_cast<std::size_t>(j)] < 0) sol.status = LpStatus::Unbounded;
    }
    return sol;
  }

  // ---- basis management --------------------------------------------------

  void set_basis(const std::vector<int>& cols) {
    std::fill(pos_.begin(), pos_.end(), -1);
    for (int i = 0; i < m_; ++i) {
      basis_[static_cast<std::size_t>(i)] = cols[static_cast<std::size_t>(i)];
      pos_[static_cast<std::size_t>(cols[static_cast<std::size_t>(i)])] = i;
    }
  }

  bool try_warm_start(const LpBasis& warm) {
    if (has_bound_rows_) return false;
    std::vector<int> cols;
    std::vector<char> used(static_cast<std::size_t>(total_cols_), 0);
    for (int j : warm.basic_cols) {
      if (j < 0 || j >= n_ || used[static_cast<std::size_t>(j)]) return false;
      used[static_cast<std::size_t>(j)] = 1;
      cols.push_back(j);
    }
    for (int i : warm.basic_row_slacks) {
      if (i < 0 || i >= m_) return false;
      const int s = slack_of_row_[static_cast<std::size_t>(i)];
      if (s < 0 || used[static_cast<std::size_t>(s)]) return false;
      used[static_cast<std::size_t>(s)] = 1;
      cols.push_back(s);
    }
    if (static_cast<int>(cols.size()) != m_) return false;
    set_basis(cols);
    if (!refactor()) return false;
    for (double& v : x_) {
      if (v < -feas_tol()) return false;
      v = std::max(v, 0.0);
    }
    return true;
  }

  void cold_start() {
    // Slack where it is feasible, else the cheapest positive unit column of
    // the row, else the row's artificial.
    std::vector<int> unit_for_row(static_cast<std::size_t>(m_), -1);
    for (int j = 0; j < n_; ++j) {
      const int b = col_start_[static_cast<std::size_t>(j)];
      if (col_start_[static_cast<std::size_t>(j) + 1] - b != 1) continue;
      const double a = val_[static_cast<std::size_t>(b)];
      if (a <= 0) continue;
      const auto i = static_cast<std::size_t>(row_idx_[static_cast<std::size_t>(b)]);
      const int cur = unit_for_row[i];
      if (cur < 0 || cost_[static_cast<std::size_t>(j)] / a < cost_[static_cast<std::size_t>(cur)] / unit_value(cur)) {
        unit_for_row[i] = j;
      }
    }
    std::vector<int> cols(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      const int s = slack_of_row_[static_cast<std::size_t>(i)];
      if (s >= 0 && val_[static_cast<std::size_t>(col_start_[static_cast<std::size_t>(s)])] > 0) {
        cols[static_cast<std::size_t>(i)] = s;
      } else if (unit_for_row[static_cast<std::size_t>(i)] >= 0) {
        cols[static_cast<std::size_t>(i)] = unit_for_row[static_cast<std::size_t>(i)];
      } else {
        cols[static_cast<std::size_t>(i)] = first_artificial_ + i;
      }
    }
    set_basis(cols);
    if (!refactor()) throw InternalError("simplex: initial basis is singular");
    for (double& v : x_) v = std::max(v, 0.0);
  }

  double unit_value(int j) const { return val_[static_cast<std::size_t>(col_start_[static_cast<std::size_t>(j)])]; }

  bool any_artificial_basic() const {
    for (int j : basis_) {
      if (is_artificial(j)) return true;
    }
    return false;
  }

  bool refactor() {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p) {
        trip.emplace_back(row_idx_[static_cast<std::size_t>(p)], i, val_[static_cast<std::size_t>(p)]);
      }
    }
    Eigen::SparseMatrix<double> B(m_, m_);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu_.analyzePattern(B);
    lu_.factorize(B);
    if (lu_.info() != Eigen::Success) return false;
    etas_.clear();
    Eigen::VectorXd rhs(m_);
    for (int i = 0; i < m_; ++i) rhs[i] = b_[static_cast<std::size_t>(i)];
    const Eigen::VectorXd xb = lu_.solve(rhs);
    for (int i = 0; i < m_; ++i) x_[static_cast<std::size_t>(i)] = xb[i];
    return true;
  }

  Eigen::VectorXd ftran(int j) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
    for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p) {
      a[row_idx_[static_cast<std::size_t>(p)]] = val_[static_cast<std::size_t>(p)];
    }
    Eigen::VectorXd z = lu_.solve(a);
    for (const Eta& e : etas_) {
      const double zr = z[e.r];
      if (zr == 0.0) continue;
      z[e.r] = zr * e.pivot_inv;
      for (auto [i, v] : e.others) z[i] += v * zr;
    }
    return z;
  }

  Eigen::VectorXd btran(Eigen::VectorXd c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[it->r] * it->pivot_inv;
      for (auto [i, v] : it->others) s += v * c[i];
      c[it->r] = s;
    }
    return lu_.transpose().solve(c);
  }

  double feas_tol() const { return opt_.feasibility_tol * std::max(1.0, b_scale_); }

  // ---- iterations ---------------------------------------------------------

  bool out_of_time() const {
    if (!std::isfinite(opt_.time_limit_seconds)) return false;
    const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start_;
    return el.count() > opt_.time_limit_seconds;
  }

  Eigen::VectorXd duals_for(int phase) const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = phase_cost(basis_[static_cast<std::size_t>(i)], phase);
    return btran(std::move(cb));
  }

  LpStatus iterate(int phase) {
    int degenerate_run = 0;
    bool bland = false;
    while (true) {
      if (iterations_ >= max_iter_) return LpStatus::IterationLimit;
      if ((iterations_ & 63) == 0 && out_of_time()) return LpStatus::TimeLimit;

      const Eigen::VectorXd y = duals_for(phase);

      // Pricing.
      int q = -1;
      double best = 0.0;
      for (int j = 0; j < first_artificial_; ++j) {
        if (pos_[static_cast<std::size_t>(j)] >= 0) continue;
        const double c = phase_cost(j, phase);
        double d = c, mag = 0.0;
        for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p) {
          const double t = y[row_idx_[static_cast<std::size_t>(p)]] * val_[static_cast<std::size_t>(p)];
          d -= t;
          mag += std::abs(t);
        }
        const double tol = opt_.optimality_tol * (1.0 + std::abs(c)) + 1e-11 * mag;
        if (d >= -tol) continue;
        if (bland) {
          q = j;
          break;
        }
        if (d < best) {
          best = d;
          q = j;
        }
      }
      if (q < 0) return LpStatus::Optimal;

      const Eigen::VectorXd alpha = ftran(q);

      // Ratio test.
      int r = -1;
      double theta = 0.0;
      const double delta = feas_tol();
      // Artificials stuck at zero in phase 2 must not move in either direction.
      if (phase == 2) {
        double amax = 0.0;
        for (int i = 0; i < m_; ++i) {
          if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
          if (std::abs(alpha[i]) > opt_.pivot_tol && std::abs(alpha[i]) > amax) {
            amax = std::abs(alpha[i]);
            r = i;
          }
        }
      }
      if (r < 0 && bland) {
        // Minimum ratio; ties go to the basic variable with the smallest index.
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] <= opt_.pivot_tol) continue;
          const double ratio = std::max(x_[static_cast<std::size_t>(i)], 0.0) / alpha[i];
          if (r < 0 || ratio < best_ratio) {
            best_ratio = ratio;
            r = i;
          }
        }
        if (r >= 0) {
          const double slack = 1e-12 * (1.0 + best_ratio);
          for (int i = 0; i < m_; ++i) {
            if (alpha[i] <= opt_.pivot_tol) continue;
            const double ratio = std::max(x_[static_cast<std::size_t>(i)], 0.0) / alpha[i];
            if (ratio <= best_ratio + slack && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(r)]) r = i;
          }
          theta = std::max(x_[static_cast<std::size_t>(r)], 0.0) / alpha[r];
        }
      } else if (r < 0) {
        double theta_max = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] > opt_.pivot_tol) theta_max = std::min(theta_max, (x_[static_cast<std::size_t>(i)] + delta) / alpha[i]);
        }
        if (std::isfinite(theta_max)) {
          double amax = 0.0;
          for (int i = 0; i < m_; ++i) {
            if (alpha[i] <= opt_.pivot_tol) continue;
            if (x_[static_cast<std::size_t>(i)] / alpha[i] <= theta_max && alpha[i] > amax) {
              amax = alpha[i];
              r = i;
            }
          }
          theta = std::max(x_[static_cast<std::size_t>(r)] / alpha[r], 0.0);
        }
      } else {
        theta = 0.0;
      }
      if (r < 0) {
        if (phase == 1) throw InternalError("simplex: phase 1 reported unbounded");
        return LpStatus::Unbounded;
      }

      // Pivot.
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[static_cast<std::size_t>(i)] -= theta * alpha[i];
      }
      x_[static_cast<std::size_t>(r)] = theta;
      for (double& v : x_) {
        if (v < 0.0) v = 0.0;
      }
      const int leaving = basis_[static_cast<std::size_t>(r)];
      pos_[static_cast<std::size_t>(leaving)] = -1;
      basis_[static_cast<std::size_t>(r)] = q;
      pos_[static_cast<std::size_t>(q)] = r;
      ++iterations_;

      Eta eta;
      eta.r = r;
      eta.pivot_inv = 1.0 / alpha[r];
      for (int i = 0; i < m_; ++i) {
        if (i != r && std::abs(alpha[i]) > 1e-14) eta.others.emplace_back(i, -alpha[i] * eta.pivot_inv);
      }
      etas_.push_back(std::move(eta));
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        if (!refactor()) {
          recovering_ = true;
          return LpStatus::IterationLimit;
        }
        for (double& v : x_) {
          if (v < -1e-6 * (1.0 + b_scale_)) {
            recovering_ = true;
            return LpStatus::IterationLimit;
          }
          v = std::max(v, 0.0);
        }
      }

      if (theta * std::abs(best) <= 1e-12 * (1.0 + b_scale_) || theta <= delta * 1e-3) {
        if (++degenerate_run >= opt_.degenerate_pivots_before_bland) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
      e[i] = 1.0;
      const Eigen::VectorXd rho = btran(std::move(e));
      int best = -1;
      double amax = 1e-7;
      for (int j = 0; j < first_artificial_; ++j) {
        if (pos_[static_cast<std::size_t>(j)] >= 0) continue;
        double a = 0.0;
        for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p) {
          a += rho[row_idx_[static_cast<std::size_t>(p)]] * val_[static_cast<std::size_t>(p)];
        }
        if (std::abs(a) > amax) {
          amax = std::abs(a);
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row: the artificial stays basic at zero
      const Eigen::VectorXd alpha = ftran(best);
      const int leaving = basis_[static_cast<std::size_t>(i)];
      pos_[static_cast<std::size_t>(leaving)] = -1;
      basis_[static_cast<std::size_t>(i)] = best;
      pos_[static_cast<std::size_t>(best)] = i;
      x_[static_cast<std::size_t>(i)] = 0.0;
      Eta eta;
      eta.r = i;
      eta.pivot_inv = 1.0 / alpha[i];
      for (int k = 0; k < m_; ++k) {
        if (k != i && std::abs(alpha[k]) > 1e-14) eta.others.emplace_back(k, -alpha[k] * eta.pivot_inv);
      }
      etas_.push_back(std::move(eta));
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        if (!refactor()) {
          recovering_ = true;
          return;
        }
        for (double& v : x_) v = std::max(v, 0.0);
      }
    }
  }

  LpSolution finish(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    sol.primal.assign(static_cast<std::size_t>(n_), 0.0);
    sol.duals.assign(static_cast<std::size_t>(rows_orig_), 0.0);
    if (status != LpStatus::Optimal) return sol;
    // Fresh factorization for the reported point.
    if (!etas_.empty() && refactor()) {
      for (double& v : x_) v = std::max(v, 0.0);
    }
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) sol.primal[static_cast<std::size_t>(j)] = x_[static_cast<std::size_t>(i)];
    }
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[static_cast<std::size_t>(j)] * sol.primal[static_cast<std::size_t>(j)];
    sol.objective = obj;
    const Eigen::VectorXd y = duals_for(2);
    double dual_obj = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double yi = flip_[static_cast<std::size_t>(i)] ? -y[i] : y[i];
      const double bi = flip_[static_cast<std::size_t>(i)] ? -b_[static_cast<std::size_t>(i)] : b_[static_cast<std::size_t>(i)];
      dual_obj += yi * bi;
      if (i < rows_orig_) sol.duals[static_cast<std::size_t>(i)] = yi;
    }
    sol.dual_objective = dual_obj;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) {
        sol.basis.basic_cols.push_back(j);
      } else if (!is_artificial(j)) {
        const int row = row_idx_[static_cast<std::size_t>(col_start_[static_cast<std::size_t>(j)])];
        if (row < rows_orig_) sol.basis.basic_row_slacks.push_back(row);
      }
    }
    return sol;
  }

  const LpProblem& lp_;
  SimplexOptions opt_;
  int n_ = 0, m_ = 0, rows_orig_ = 0, total_cols_ = 0, first_artificial_ = 0;
  bool has_bound_rows_ = false;
  std::vector<char> flip_;
  std::vector<double> b_;
  double b_scale_ = 0.0;
  std::vector<int> col_start_, row_idx_;
  std::vector<double> val_, cost_;
  std::vector<int> slack_of_row_;
  std::vector<int> basis_, pos_;
  std::vector<double> x_;
  std::vector<Eta> etas_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::size_t iterations_ = 0, max_iter_ = 0;
  bool recovering_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

class SimplexBackend final : public LpBackend {
 public:
  explicit SimplexBackend(SimplexOptions options = {}) : options_(options) {}

  BackendCapabilities capabilities() const override {
    return {true, DualSign::Minimization, "builtin revised simplex"};
  }

  LpSolution solve(const LpProblem& lp, const LpBasis* warm = nullptr) override {
    detail::RevisedSimplex s(lp, options_);
    return s.run(warm);
  }

  void set_time_limit(double seconds) override { options_.time_limit_seconds = seconds; }

  SimplexOptions& options() noexcept { return options_; }

 private:
  SimplexOptions options_;
};

/// Solves with the built-in backend.
inline LpSolution builtin_lp_solve(const LpProblem& lp, const LpBasis* warm = nullptr) {
  SimplexBackend backend;
  return backend.solve(lp, warm);
}

}  // namespace mcf
