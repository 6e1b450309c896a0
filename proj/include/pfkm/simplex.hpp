#ifndef PFKM_SIMPLEX_HPP
#define PFKM_SIMPLEX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pfkm {

enum class RowType { LessEq, Eq };

/// Minimize c.x subject to sparse rows (<= or =) and x >= 0.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  struct Row {
    RowType type = RowType::LessEq;
    std::vector<std::pair<int, double>> coeffs;
    double rhs = 0.0;
  };
  std::vector<Row> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct SimplexResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

/// Thrown when the pivot cap is hit; deliberately distinct from infeasible.
class SolverLimitError : public std::runtime_error {
 public:
  explicit SolverLimitError(const std::string& what) : std::runtime_error(what) {}
};

// Dense two-phase tableau simplex. Dantzig pricing with a switch to Bland's
// rule after 2*(rows+cols) pivots; phase-1 optimum above 1e-7 means
// infeasible. Sized for desk-scale assignment LPs, not for sparsity.
class SimplexSolver {
 public:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kReducedCostTol = 1e-9;
  static constexpr double kPhase1Tol = 1e-7;

  explicit SimplexSolver(const LinearProgram& lp, long long pivot_cap = -1)
      : lp_(lp), pivot_cap_(pivot_cap) {}

  SimplexResult solve() {
    if (!presolve()) return {LpStatus::Infeasible, 0.0, {}};
    build_tableau();
    long long bland_after = 2LL * (static_cast<long long>(m_) + total_cols_);
    long long cap = pivot_cap_ >= 0 ? pivot_cap_
                                    : 500LL * (static_cast<long long>(m_) + total_cols_) + 10000;

    // Phase 1: minimize the sum of artificials.
    phase1_ = true;
    reprice();
    LpStatus st = iterate(bland_after, cap);
    if (st == LpStatus::Unbounded) throw std::logic_error("phase 1 cannot be unbounded");
    if (-cost_.back() > kPhase1Tol) return {LpStatus::Infeasible, 0.0, {}};
    drive_out_artificials();

    // Phase 2 over the real objective; artificials never re-enter.
    phase1_ = false;
    reprice();
    st = iterate(bland_after, cap);
    if (st == LpStatus::Unbounded) return {LpStatus::Unbounded, 0.0, {}};

    SimplexResult res;
    res.status = LpStatus::Optimal;
    res.x.assign(lp_.num_vars, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < lp_.num_vars) res.x[basis_[i]] = rhs(i);
    for (double& v : res.x)
      if (v < 0.0 && v > -1e-9) v = 0.0;
    res.objective = 0.0;
    for (int j = 0; j < lp_.num_vars; ++j) res.objective += lp_.objective[j] * res.x[j];
    return res;
  }

 private:
  const LinearProgram& lp_;
  long long pivot_cap_ = -1;
  int m_ = 0;            // surviving rows after presolve
  int total_cols_ = 0;   // vars + slacks + artificials
  int slack_begin_ = 0;
  int art_begin_ = 0;
  int width_ = 0;  // total_cols_ + 1 (rhs)
  std::vector<double> tab_;
  std::vector<double> cost_;  // reduced-cost row, width_ wide
  std::vector<int> basis_;
  std::vector<int> live_rows_;
  bool phase1_ = true;

  double& at(int r, int c) { return tab_[static_cast<std::size_t>(r) * width_ + c]; }
  double rhs(int r) const { return tab_[static_cast<std::size_t>(r) * width_ + total_cols_]; }

  // Empty rows never reach the tableau; an unsatisfiable empty row makes the
  // whole program infeasible up front.
  bool presolve() {
    live_rows_.clear();
    for (std::size_t r = 0; r < lp_.rows.size(); ++r) {
      const auto& row = lp_.rows[r];
      if (row.coeffs.empty()) {
        bool ok = row.type == RowType::LessEq ? row.rhs >= -kPhase1Tol : std::abs(row.rhs) <= kPhase1Tol;
        if (!ok) return false;
        continue;
      }
      live_rows_.push_back(static_cast<int>(r));
    }
    return true;
  }

  void build_tableau() {
    m_ = static_cast<int>(live_rows_.size());
    int num_slack = 0;
    for (int r : live_rows_)
      if (lp_.rows[r].type == RowType::LessEq) ++num_slack;
    slack_begin_ = lp_.num_vars;
    art_begin_ = slack_begin_ + num_slack;
    // One artificial column per row keeps the bookkeeping simple; rows whose
    // slack starts basic never use theirs.
    total_cols_ = art_begin_ + m_;
    width_ = total_cols_ + 1;
    tab_.assign(static_cast<std::size_t>(m_) * width_, 0.0);
    basis_.assign(m_, -1);

    int slack_cursor = slack_begin_;
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp_.rows[live_rows_[i]];
      double sign = row.rhs < 0.0 ? -1.0 : 1.0;
      for (auto [j, v] : row.coeffs) at(i, j) += sign * v;
      at(i, total_cols_) = sign * row.rhs;
      if (row.type == RowType::LessEq) {
        at(i, slack_cursor) = sign;
        if (sign > 0.0) basis_[i] = slack_cursor;
        ++slack_cursor;
      }
      if (basis_[i] < 0) {
        at(i, art_begin_ + i) = 1.0;
        basis_[i] = art_begin_ + i;
      }
    }
  }

  double var_cost(int var) const {
    if (var >= art_begin_) return phase1_ ? 1.0 : 0.0;
    if (var >= lp_.num_vars) return 0.0;
    return phase1_ ? 0.0 : lp_.objective[var];
  }

  // Rebuild the reduced-cost row for the current phase and basis:
  // cost_[j] = c_j - sum_i c_B(i) * T[i][j].
  void reprice() {
    cost_.assign(width_, 0.0);
    for (int j = 0; j < total_cols_; ++j) cost_[j] = var_cost(j);
    for (int i = 0; i < m_; ++i) {
      double cb = var_cost(basis_[i]);
      if (cb == 0.0) continue;
      const double* row = &tab_[static_cast<std::size_t>(i) * width_];
      for (int j = 0; j < width_; ++j) cost_[j] -= cb * row[j];
    }
  }

  // Basic artificials sit at zero after a feasible phase 1. Pivot each onto a
  // real column so phase-2 pivots cannot lift them; an all-zero row is
  // redundant and gets blanked.
  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      int best = -1;
      double best_mag = kPivotTol;
      for (int j = 0; j < art_begin_; ++j) {
        double mag = std::abs(at(i, j));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best >= 0) {
        pivot(i, best);
      } else {
        double* row = &tab_[static_cast<std::size_t>(i) * width_];
        std::fill(row, row + width_, 0.0);
      }
    }
  }

  LpStatus iterate(long long bland_after, long long cap) {
    int limit = phase1_ ? total_cols_ : art_begin_;
    for (long long iter = 0;; ++iter) {
      if (iter > cap)
        throw SolverLimitError("simplex pivot cap exceeded (" + std::to_string(cap) + ")");
      bool bland = iter >= bland_after;
      int enter = -1;
      if (bland) {
        for (int j = 0; j < limit; ++j)
          if (cost_[j] < -kReducedCostTol) {
            enter = j;
            break;
          }
      } else {
        double best = -kReducedCostTol;
        for (int j = 0; j < limit; ++j)
          if (cost_[j] < best) {
            best = cost_[j];
            enter = j;
          }
      }
      if (enter < 0) return LpStatus::Optimal;

      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        double a = at(i, enter);
        if (a <= kPivotTol) continue;
        double ratio = rhs(i) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
  }

  void pivot(int r, int e) {
    double* prow = &tab_[static_cast<std::size_t>(r) * width_];
    double inv = 1.0 / prow[e];
    for (int j = 0; j < width_; ++j) prow[j] *= inv;
    prow[e] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[static_cast<std::size_t>(i) * width_];
      double f = row[e];
      if (f == 0.0) continue;
      for (int j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[e] = 0.0;
    }
    double f = cost_[e];
    if (f != 0.0) {
      for (int j = 0; j < width_; ++j) cost_[j] -= f * prow[j];
      cost_[e] = 0.0;
    }
    basis_[r] = e;
  }
};

inline SimplexResult solve_simplex(const LinearProgram& lp, long long pivot_cap = -1) {
  return SimplexSolver(lp, pivot_cap).solve();
}

}  // namespace pfkm

#endif  // PFKM_SIMPLEX_HPP
