#pragma once

// Dense view of an instance for the search: present tasks, per-pair
// admissibility and hour intervals, per-TA windows and cost levels.

#include <cstdint>
#include <string>
#include <vector>

#include "tap/instance.hpp"

namespace tap::solver::detail {

struct TaskInfo {
  int c = 0;
  int t = 0;
  int tau = 0;
  int rho = 0;
  bool admin = false;
  int need = 1;  // max(rho, 1): Eq6 needs someone, Eq8 asks for rho
};

/// Pair state for y[s,k].
enum class Cell : std::uint8_t { blocked, free, forced };

/// One admissible window of h with the penalty charged inside it. Levels are
/// nested and sorted by increasing cost; the last one is the hard window.
struct Level {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t cost = 0;
};

struct Problem {
  const Instance* instance = nullptr;
  int S = 0;
  int C = 0;
  int K = 0;
  std::vector<TaskInfo> tasks;
  std::vector<std::vector<int>> course_tasks;  // c -> task ids
  std::vector<int> task_of;                    // c * kTaskKinds + t -> task id or -1

  std::vector<std::int64_t> target;
  std::vector<std::int64_t> hard_lo;
  std::vector<std::int64_t> hard_hi;
  std::vector<std::vector<Level>> levels;  // indicator mode

  std::vector<Cell> cell;           // s * K + k
  std::vector<int> cell_lo;         // hours interval when y = 1
  std::vector<int> cell_hi;
  std::vector<std::uint8_t> kappa;  // s * C + c
  std::vector<std::int8_t> pref;
  std::vector<std::uint8_t> course_pin;

  BoundConfig bounds;
  WeightConfig weights;
  PenaltyMode mode = PenaltyMode::indicator;

  /// Set when the root is already contradictory, e.g. "Eq13[c0]".
  std::string root_conflict;

  std::size_t sk(int s, int k) const { return static_cast<std::size_t>(s) * K + k; }
  std::size_t sc(int s, int c) const { return static_cast<std::size_t>(s) * C + c; }

  /// Soft cost of a total h for TA s (Eq14 and Eq15), ignoring the hard window.
  std::int64_t hours_cost(int s, std::int64_t h) const;
  /// Smallest hours_cost over [lo, hi] intersected with the hard window;
  /// -1 when the intersection is empty.
  std::int64_t min_hours_cost(int s, std::int64_t lo, std::int64_t hi) const;
};

Problem make_problem(const Instance& instance, PenaltyMode mode);

}  // namespace tap::solver::detail
