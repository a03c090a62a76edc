#pragma once

// Exact linear programming over Q.
//
// Dense two-phase tableau simplex with Bland's anti-cycling rule. Problems in
// this library are tiny (tens of variables), so the tableau is rebuilt from
// scratch on every solve and reduced costs are recomputed each pivot.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "gitstrat/rational.hpp"

namespace gitstrat {

enum class Sense { LessEq, Equal, GreaterEq };

struct LinearConstraint {
  QVec coeffs;
  Sense sense;
  Q rhs;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  QVec x;        // valid when Optimal
  Q objective;   // valid when Optimal (in the caller's min/max sense)
};

class LinearProgram {
 public:
  explicit LinearProgram(std::size_t num_vars)
      : num_vars_(num_vars), free_(num_vars, false), cost_(zeros(num_vars)) {}

  std::size_t num_vars() const { return num_vars_; }

  /// Variables are nonnegative unless marked free.
  void set_free(std::size_t var) { free_.at(var) = true; }
  void set_all_free() { std::fill(free_.begin(), free_.end(), true); }

  void add(QVec coeffs, Sense sense, Q rhs) {
    require_dims(coeffs.size(), num_vars_, "LinearProgram::add");
    rows_.push_back({std::move(coeffs), sense, std::move(rhs)});
  }

  void minimize(QVec objective) {
    require_dims(objective.size(), num_vars_, "LinearProgram::minimize");
    cost_ = std::move(objective);
    maximize_ = false;
  }

  void maximize(QVec objective) {
    require_dims(objective.size(), num_vars_, "LinearProgram::maximize");
    cost_ = std::move(objective);
    maximize_ = true;
  }

  const std::vector<LinearConstraint>& constraints() const { return rows_; }

  LpResult solve() const;

  /// Optimizes `objectives` in priority order, pinning each optimum before
  /// moving to the next one. Stops at the first non-optimal stage.
  LpResult solve_lexicographic(const std::vector<QVec>& objectives, bool maximize) const {
    LinearProgram lp(*this);
    LpResult last;
    last.status = LpStatus::Infeasible;
    for (const auto& obj : objectives) {
      if (maximize) lp.maximize(obj); else lp.minimize(obj);
      last = lp.solve();
      if (last.status != LpStatus::Optimal) return last;
      lp.add(obj, Sense::Equal, last.objective);
    }
    if (objectives.empty()) last = lp.solve();
    return last;
  }

 private:
  std::size_t num_vars_;
  std::vector<bool> free_;
  std::vector<LinearConstraint> rows_;
  QVec cost_;
  bool maximize_ = false;
};

namespace detail {

struct Tableau {
  std::vector<QVec> rows;           // each row: columns..., rhs
  std::vector<std::size_t> basis;   // basic column per row
  std::size_t ncols = 0;            // excluding rhs

  void pivot(std::size_t r, std::size_t c) {
    QVec& pr = rows[r];
    const Q p = pr[c];
    for (auto& v : pr) v /= p;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || sgn(rows[i][c]) == 0) continue;
      const Q f = rows[i][c];
      for (std::size_t j = 0; j <= ncols; ++j) rows[i][j] -= f * pr[j];
    }
    basis[r] = c;
  }
};

enum class PhaseOutcome { Optimal, Unbounded };

// Minimizes cost·x over the current tableau using Bland's rule, only letting
// columns with allowed[j] enter.
inline PhaseOutcome run_phase(Tableau& t, const QVec& cost, const std::vector<bool>& allowed) {
  const std::size_t m = t.rows.size();
  for (;;) {
    std::optional<std::size_t> entering;
    for (std::size_t j = 0; j < t.ncols && !entering; ++j) {
      if (!allowed[j]) continue;
      Q reduced = cost[j];
      for (std::size_t i = 0; i < m; ++i) reduced -= cost[t.basis[i]] * t.rows[i][j];
      if (sgn(reduced) < 0) entering = j;
    }
    if (!entering) return PhaseOutcome::Optimal;
    const std::size_t c = *entering;
    std::optional<std::size_t> leave;
    Q best_ratio;
    for (std::size_t i = 0; i < m; ++i) {
      if (sgn(t.rows[i][c]) <= 0) continue;
      Q ratio = t.rows[i][t.ncols] / t.rows[i][c];
      if (!leave || ratio < best_ratio ||
          (ratio == best_ratio && t.basis[i] < t.basis[*leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (!leave) return PhaseOutcome::Unbounded;
    t.pivot(*leave, c);
  }
}

}  // namespace detail

inline LpResult LinearProgram::solve() const {
  // Column layout: structural columns (free variables split into +/-),
  // then slack/surplus columns, then artificial columns.
  std::vector<std::size_t> pos_col(num_vars_), neg_col(num_vars_, SIZE_MAX);
  std::size_t ncols = 0;
  for (std::size_t v = 0; v < num_vars_; ++v) {
    pos_col[v] = ncols++;
    if (free_[v]) neg_col[v] = ncols++;
  }

  struct RowPlan {
    QVec coeffs;
    Sense sense;
    Q rhs;
  };
  std::vector<RowPlan> plan;
  plan.reserve(rows_.size());
  for (const auto& r : rows_) {
    RowPlan p{r.coeffs, r.sense, r.rhs};
    if (sgn(p.rhs) < 0) {
      for (auto& c : p.coeffs) c = -c;
      p.rhs = -p.rhs;
      if (p.sense == Sense::LessEq) p.sense = Sense::GreaterEq;
      else if (p.sense == Sense::GreaterEq) p.sense = Sense::LessEq;
    }
    plan.push_back(std::move(p));
  }

  std::vector<std::size_t> slack_col(plan.size(), SIZE_MAX), art_col(plan.size(), SIZE_MAX);
  for (std::size_t i = 0; i < plan.size(); ++i)
    if (plan[i].sense != Sense::Equal) slack_col[i] = ncols++;
  const std::size_t first_art = ncols;
  for (std::size_t i = 0; i < plan.size(); ++i)
    if (plan[i].sense != Sense::LessEq) art_col[i] = ncols++;

  detail::Tableau t;
  t.ncols = ncols;
  t.rows.assign(plan.size(), zeros(ncols + 1));
  t.basis.assign(plan.size(), 0);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    auto& row = t.rows[i];
    for (std::size_t v = 0; v < num_vars_; ++v) {
      row[pos_col[v]] = plan[i].coeffs[v];
      if (neg_col[v] != SIZE_MAX) row[neg_col[v]] = -plan[i].coeffs[v];
    }
    if (plan[i].sense == Sense::LessEq) {
      row[slack_col[i]] = 1;
      t.basis[i] = slack_col[i];
    } else {
      if (plan[i].sense == Sense::GreaterEq) row[slack_col[i]] = -1;
      row[art_col[i]] = 1;
      t.basis[i] = art_col[i];
    }
    row[ncols] = plan[i].rhs;
  }

  // Phase 1.
  if (first_art < ncols) {
    QVec cost1 = zeros(ncols);
    for (std::size_t j = first_art; j < ncols; ++j) cost1[j] = 1;
    std::vector<bool> allowed(ncols, true);
    detail::run_phase(t, cost1, allowed);
    Q infeas = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      if (t.basis[i] >= first_art) infeas += t.rows[i][ncols];
    if (sgn(infeas) > 0) return LpResult{LpStatus::Infeasible, {}, 0};
    // Drive zero-level artificials out of the basis; drop redundant rows.
    for (std::size_t i = 0; i < t.rows.size();) {
      if (t.basis[i] < first_art) { ++i; continue; }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < first_art && !col; ++j)
        if (sgn(t.rows[i][j]) != 0) col = j;
      if (col) {
        t.pivot(i, *col);
        ++i;
      } else {
        t.rows.erase(t.rows.begin() + static_cast<std::ptrdiff_t>(i));
        t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  // Phase 2.
  QVec cost2 = zeros(ncols);
  for (std::size_t v = 0; v < num_vars_; ++v) {
    const Q c = maximize_ ? Q(-cost_[v]) : cost_[v];
    cost2[pos_col[v]] = c;
    if (neg_col[v] != SIZE_MAX) cost2[neg_col[v]] = -c;
  }
  std::vector<bool> allowed(ncols, false);
  for (std::size_t j = 0; j < first_art; ++j) allowed[j] = true;
  if (detail::run_phase(t, cost2, allowed) == detail::PhaseOutcome::Unbounded)
    return LpResult{LpStatus::Unbounded, {}, 0};

  QVec colval = zeros(ncols);
  for (std::size_t i = 0; i < t.rows.size(); ++i) colval[t.basis[i]] = t.rows[i][ncols];
  LpResult res;
  res.status = LpStatus::Optimal;
  res.x = zeros(num_vars_);
  for (std::size_t v = 0; v < num_vars_; ++v) {
    res.x[v] = colval[pos_col[v]];
    if (neg_col[v] != SIZE_MAX) res.x[v] -= colval[neg_col[v]];
  }
  res.objective = dot(cost_, res.x);
  return res;
}

}  // namespace gitstrat
