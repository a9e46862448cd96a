#pragma once

// Hour distribution for a fixed support: every y[s,k] = 1 cell gets hours in
// its interval, each task is covered exactly, and the per-TA penalty on the
// resulting h is minimized. Magnitude costs are convex and go straight into a
// min-cost flow; indicator costs are step functions over nested windows and
// are handled by a search over window levels with the flow as the oracle.

#include <cstdint>
#include <vector>

#include "solver/problem.hpp"

namespace tap::solver::detail {

struct HoursOptions {
  /// Flow evaluations allowed in the indicator level search; 0 = unlimited.
  std::uint64_t level_cap = 0;
  /// Among equal-penalty distributions prefer the smallest sum of (h - target)^2.
  bool tie_break = false;
};

struct HoursResult {
  bool feasible = false;
  bool exact = true;  // false when the level search hit its cap
  std::int64_t cost = 0;
  std::vector<int> x;           // s * K + k
  std::vector<std::int64_t> h;  // per TA
  std::uint64_t flows = 0;
};

/// `y` has one entry per (s, k), 1 = the TA works on the task.
HoursResult solve_hours(const Problem& p, const std::vector<std::uint8_t>& y, const HoursOptions& opt);

/// h of a routing that keeps every TA as close to its hard window as the
/// support allows. Empty when some task cannot be covered at all.
std::vector<std::int64_t> closest_hours(const Problem& p, const std::vector<std::uint8_t>& y);

}  // namespace tap::solver::detail
