// Exhaustive reference search over an IR. Deliberately shares nothing with
// the branch and bound so the two can check each other.

#include <algorithm>
#include <chrono>

#include "tap/solver.hpp"

namespace tap::solver {

namespace {

using model::LinearConstraint;
using model::ModelIR;
using model::Relation;
using model::Valuation;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

class Enumerator {
 public:
  Enumerator(const ModelIR& ir, std::uint64_t budget) : ir_(ir), budget_(budget) {
    const std::size_t nv = ir.variables.size();
    rows_of_.resize(nv);
    values_.assign(nv, 0);
    assigned_.assign(nv, 0);
    const std::size_t nr = ir.constraints.size();
    fixed_.assign(nr, 0);
    min_free_.assign(nr, 0);
    max_free_.assign(nr, 0);
    for (std::size_t r = 0; r < nr; ++r) {
      for (const auto& term : ir.constraints[r].terms) {
        rows_of_[term.var].push_back({static_cast<int>(r), term.coef});
        const auto& v = ir.variables[term.var];
        min_free_[r] += term.coef * (term.coef > 0 ? v.lo : v.hi);
        max_free_[r] += term.coef * (term.coef > 0 ? v.hi : v.lo);
      }
    }
    for (std::size_t i = 0; i < nv; ++i) {
      if (!ir.variables[i].is_realization()) structural_.push_back(static_cast<int>(i));
    }
  }

  void run(const std::function<void(const Valuation&)>& leaf) {
    leaf_ = &leaf;
    // Rows without any variables are decided up front.
    for (std::size_t r = 0; r < ir_.constraints.size(); ++r) {
      if (ir_.constraints[r].terms.empty() && !model::row_satisfied(ir_.constraints[r], values_)) return;
    }
    descend(0);
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  struct Use {
    int row;
    std::int64_t coef;
  };

  /// Range of v consistent with every row given the other variables' ranges.
  bool interval(int var, std::int64_t& lo, std::int64_t& hi) const {
    const auto& v = ir_.variables[var];
    lo = v.lo;
    hi = v.hi;
    for (const Use& u : rows_of_[var]) {
      const LinearConstraint& row = ir_.constraints[u.row];
      const std::int64_t own_min = u.coef * (u.coef > 0 ? v.lo : v.hi);
      const std::int64_t own_max = u.coef * (u.coef > 0 ? v.hi : v.lo);
      const std::int64_t others_min = fixed_[u.row] + min_free_[u.row] - own_min;
      const std::int64_t others_max = fixed_[u.row] + max_free_[u.row] - own_max;
      // a * v <= rhs - others_min  and/or  a * v >= rhs - others_max
      if (row.rel != Relation::ge) {
        const std::int64_t cap = row.rhs - others_min;
        if (u.coef > 0) hi = std::min(hi, floor_div(cap, u.coef));
        else lo = std::max(lo, ceil_div(cap, u.coef));
      }
      if (row.rel != Relation::le) {
        const std::int64_t need = row.rhs - others_max;
        if (u.coef > 0) lo = std::max(lo, ceil_div(need, u.coef));
        else hi = std::min(hi, floor_div(need, u.coef));
      }
      if (lo > hi) return false;
    }
    return lo <= hi;
  }

  void set(int var, std::int64_t value, int sign) {
    const auto& v = ir_.variables[var];
    for (const Use& u : rows_of_[var]) {
      fixed_[u.row] += sign * u.coef * value;
      min_free_[u.row] -= sign * u.coef * (u.coef > 0 ? v.lo : v.hi);
      max_free_[u.row] -= sign * u.coef * (u.coef > 0 ? v.hi : v.lo);
    }
    assigned_[var] = sign > 0;
    values_[var] = sign > 0 ? value : 0;
  }

  void descend(std::size_t depth) {
    if (depth == structural_.size()) {
      if (realize()) {
        (*leaf_)(values_);
        release();
      }
      return;
    }
    const int var = structural_[depth];
    std::int64_t lo = 0, hi = 0;
    if (!interval(var, lo, hi)) return;
    for (std::int64_t value = lo; value <= hi; ++value) {
      if (++nodes_ > budget_) throw BudgetExceeded("brute force exceeded " + std::to_string(budget_) + " nodes");
      set(var, value, +1);
      if (consistent(var)) descend(depth + 1);
      set(var, value, -1);
    }
  }

  /// Every row touching `var` can still be met.
  bool consistent(int var) const {
    for (const Use& u : rows_of_[var]) {
      const LinearConstraint& row = ir_.constraints[u.row];
      const std::int64_t lo = fixed_[u.row] + min_free_[u.row];
      const std::int64_t hi = fixed_[u.row] + max_free_[u.row];
      if (row.rel != Relation::ge && lo > row.rhs) return false;
      if (row.rel != Relation::le && hi < row.rhs) return false;
    }
    return true;
  }

  /// Smallest admissible value for every realization; false if one has none.
  bool realize() {
    std::vector<int> done;
    bool ok = true;
    for (std::size_t i = 0; i < ir_.variables.size() && ok; ++i) {
      if (!ir_.variables[i].is_realization()) continue;
      std::int64_t lo = 0, hi = 0;
      ok = interval(static_cast<int>(i), lo, hi);
      if (ok) {
        set(static_cast<int>(i), lo, +1);
        done.push_back(static_cast<int>(i));
      }
    }
    if (ok) {
      for (const auto& row : ir_.constraints) {
        if (!model::row_satisfied(row, values_)) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) {
      for (auto it = done.rbegin(); it != done.rend(); ++it) set(*it, values_[*it], -1);
      return false;
    }
    pending_ = std::move(done);
    return true;
  }

  /// Restores the realizations set by the last successful leaf.
  void release() {
    for (auto it = pending_.rbegin(); it != pending_.rend(); ++it) set(*it, values_[*it], -1);
    pending_.clear();
  }

  const ModelIR& ir_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<std::vector<Use>> rows_of_;
  std::vector<int> structural_;
  Valuation values_;
  std::vector<std::uint8_t> assigned_;
  std::vector<std::int64_t> fixed_, min_free_, max_free_;
  std::vector<int> pending_;
  const std::function<void(const Valuation&)>* leaf_ = nullptr;
};

}  // namespace

void enumerate_feasible(const model::ModelIR& ir, std::uint64_t budget,
                        const std::function<void(const model::Valuation&)>& visit) {
  Enumerator e(ir, budget);
  std::function<void(const Valuation&)> leaf = [&](const Valuation& values) {
    visit(values);
  };
  e.run(leaf);
}

SolveOutcome brute_force(const model::ModelIR& ir, std::uint64_t budget) {
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  std::optional<Valuation> best;
  std::int64_t best_obj = 0;
  Enumerator e(ir, budget);
  std::function<void(const Valuation&)> leaf = [&](const Valuation& values) {
    const std::int64_t obj = model::objective_value(ir, values);
    if (!best || obj < best_obj) {
      best = values;
      best_obj = obj;
    }
  };
  e.run(leaf);
  out.stats.nodes = e.nodes();
  out.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!best) {
    out.status = Status::infeasible;
    return out;
  }
  out.status = Status::optimal;
  out.objective = best_obj;
  out.lower_bound = best_obj;
  out.best = model::assignment_from_valuation(ir, *best);
  return out;
}

}  // namespace tap::solver
