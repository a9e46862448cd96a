#pragma once

#include <cstdint>

#include "tap/assignment.hpp"
#include "tap/instance.hpp"

namespace tap::gen {

class SpecError : public Error {
 public:
  using Error::Error;
};

struct GenerateSpec {
  int n_tas = 50;
  int n_courses = 45;
  int max_tasks_per_course = 10;
  /// Total task hours over total target hours, in (0, 6/5].
  Fraction demand_to_capacity_ratio = Fraction::of(9, 10);
  std::uint64_t seed = 1;
  /// Preset year for the hard bounds.
  int bound_year = 2022;
};

struct Generated {
  Instance instance;
  /// The plan the tasks were cut from. Hard-feasible whenever every TA's
  /// share lands inside the deviation window, which holds for ratios near 1.
  Assignment witness;
};

/// Draws the TAs, then a course/task structure with a staffing plan, and only
/// then sizes the tasks from the demand ratio. The structure depends on the
/// seed alone, so for a fixed seed total task hours never drop as the ratio
/// grows. Total task hours are max(round(ratio * sum of targets),
/// min_task_hours * cells), where cells is the number of staffed (ta, course, task) cells.
Generated generate_with_witness(const GenerateSpec& spec);
Instance generate(const GenerateSpec& spec);

}  // namespace tap::gen
