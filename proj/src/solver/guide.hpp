#pragma once

// Relaxed hour plan used to steer the greedy start: a min-cost flow that
// covers every task and keeps each TA inside its hard window, ignoring the
// per-cell minimum and the course, new-course and staffing limits. Cheap
// cells are continuing courses; a small per-(TA, course) tie-break makes a
// TA's hours gather in few courses.

#include <cstdint>
#include <vector>

#include "solver/problem.hpp"

namespace tap::solver::detail {

/// Hours per (s, k) cell, s * K + k. Empty when the tasks cannot be covered.
std::vector<std::int64_t> guide_hours(const Problem& p);

}  // namespace tap::solver::detail
