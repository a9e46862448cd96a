#pragma once

// Incremental bookkeeping over partial supports: counters behind the hard
// checks on y, the support part of the penalty, and an admissible bound on
// the hour part.

#include <cstdint>
#include <string>
#include <vector>

#include "solver/problem.hpp"

namespace tap::solver::detail {

class SupportState {
 public:
  /// Every free cell starts undecided; forced cells are in, blocked cells out.
  explicit SupportState(const Problem& p);

  const Problem& problem() const { return p_; }

  /// -1 undecided, 0 out, 1 in.
  int value(int s, int k) const { return value_[p_.sk(s, k)]; }
  bool decided(int s, int k) const { return value_[p_.sk(s, k)] >= 0; }

  /// Decides an undecided cell. Returns false when a hard check fails; the
  /// change stays applied and must be undone with `undo`.
  bool assign(int s, int k, int v);
  void undo(int s, int k);

  /// Support penalty (Eqs. 16-20) of the decisions so far. Every term can
  /// only grow as more cells are decided.
  std::int64_t support_cost() const { return support_cost_; }
  /// support_cost + sum of per-TA minimum hour costs over reachable h.
  std::int64_t bound() const { return support_cost_ + hours_bound_; }

  /// Runs every check from scratch; used once at the root.
  bool consistent() const;
  /// Tag of the check that failed last, e.g. "Eq10[s3]".
  std::string conflict() const;

  std::vector<std::uint8_t> support() const;

  int in_count(int k) const { return in_[k]; }
  int open_count(int k) const { return open_[k]; }
  int courses(int s) const { return courses_[s]; }
  int new_courses(int s) const { return new_[s]; }
  int tas_on(int c) const { return tas_on_[c]; }
  bool teaches(int s, int c) const { return in_course_[p_.sc(s, c)] > 0; }
  std::int64_t h_min(int s) const { return hmin_[s]; }
  std::int64_t h_max(int s) const { return hmax_[s]; }
  std::int64_t sum_lo(int k) const { return sum_lo_[k]; }

 private:
  std::int64_t excess(std::int64_t over, std::int64_t weight) const;
  std::int64_t ta_support(int s) const;
  std::int64_t task_support(int k) const;
  std::int64_t pair_support(int s, int c) const;
  std::int64_t ta_hours(int s) const;
  void apply(int s, int k, int v, int sign);
  bool check(int s, int k) const;
  bool check_task(int k) const;
  bool check_ta(int s) const;
  bool check_pair(int s, int c) const;

  const Problem& p_;
  std::vector<std::int8_t> value_;
  std::vector<int> in_, open_;
  std::vector<std::int64_t> sum_lo_, sum_hi_in_, sum_hi_open_;
  std::vector<int> in_course_, open_course_;
  std::vector<int> courses_, new_, tas_on_;
  std::vector<std::int64_t> hmin_, hmax_;
  std::vector<std::int64_t> hours_part_;
  std::int64_t support_cost_ = 0;
  std::int64_t hours_bound_ = 0;
  enum class Subject : std::uint8_t { ta, course, task, pair };
  bool fail(const char* family, Subject subject, int a, int b = 0) const;
  mutable const char* conflict_family_ = "";
  mutable Subject conflict_subject_ = Subject::ta;
  mutable int conflict_a_ = 0;
  mutable int conflict_b_ = 0;
};

}  // namespace tap::solver::detail
