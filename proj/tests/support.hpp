#pragma once

// Shared helpers for the test suites: data file lookup and a hand-rolled
// random instance generator for property and oracle tests.

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>

#include "tap/instance.hpp"

namespace tap::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(TAP_TEST_DATA) / name;
}

inline int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool chance(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

struct RandomSpecOptions {
  int max_tas = 4;
  int max_courses = 3;
  int max_tasks = 2;  // per course, admin included
  int max_tau = 12;
  int min_tas = 1;
  int min_courses = 1;
  double forbid = 0.1;
  double preference = 0.3;
  double kappa = 0.3;
  double pins = 0.0;
  PenaltyMode mode = PenaltyMode::indicator;
};

/// Small instance whose targets sit in the same range as the task hours, so a
/// good share of draws is feasible.
inline InstanceSpec random_spec(std::mt19937_64& rng, const RandomSpecOptions& o) {
  InstanceSpec spec;
  spec.label = "random";
  const int num_tas = uniform(rng, o.min_tas, o.max_tas);
  const int num_courses = uniform(rng, o.min_courses, o.max_courses);

  BoundConfig& b = spec.bounds;
  b.annual_full_load = uniform(rng, 5, 25);
  b.hard_dev = uniform(rng, 2, 15);
  b.soft_dev = uniform(rng, 0, b.hard_dev);
  b.hard_new_courses = uniform(rng, 0, 2);
  b.soft_new_courses = uniform(rng, 0, b.hard_new_courses);
  b.hard_courses_per_ta = uniform(rng, 1, 3);
  b.soft_courses_per_ta = uniform(rng, 0, b.hard_courses_per_ta);
  b.hard_tas_per_course = uniform(rng, 1, 4);
  b.soft_extra_tas_per_task = uniform(rng, 0, 1);
  b.min_task_hours = uniform(rng, 0, 4);

  WeightConfig& w = spec.weights;
  w.target_year5 = uniform(rng, 0, 30);
  w.soft_dev = uniform(rng, 0, 30);
  w.soft_new = uniform(rng, 0, 3);
  w.soft_staff = uniform(rng, 0, 3);
  w.soft_courses = uniform(rng, 0, 6);
  w.pref_positive = uniform(rng, 0, 3);
  w.pref_negative = uniform(rng, 0, 3);
  w.penalty_mode = o.mode;

  for (int s = 0; s < num_tas; ++s) {
    TeachingAssistant ta;
    ta.id = "ta" + std::to_string(s);
    ta.year = uniform(rng, 1, 5);
    ta.employment_fraction = Fraction::of(uniform(rng, 0, 10), 10);
    ta.carryover_hours = uniform(rng, -3, 3);
    spec.tas.push_back(ta);
  }
  for (int c = 0; c < num_courses; ++c) {
    CourseSpec course;
    course.id = "course" + std::to_string(c);
    course.tasks.push_back({TaskKind::admin, uniform(rng, 1, o.max_tau), uniform(rng, 0, 1)});
    const int extra = uniform(rng, 0, o.max_tasks - 1);
    std::vector<int> kinds;
    while (static_cast<int>(kinds.size()) < extra) {
      const int k = uniform(rng, 1, kTaskKinds - 1);
      if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
    }
    for (int k : kinds) {
      const int tau = uniform(rng, 1, o.max_tau);
      course.tasks.push_back({static_cast<TaskKind>(k), tau, uniform(rng, 0, std::min(2, tau))});
    }
    spec.courses.push_back(course);
  }
  for (int s = 0; s < num_tas; ++s) {
    for (int c = 0; c < num_courses; ++c) {
      PairData p{spec.tas[s].id, spec.courses[c].id, 0, false, false};
      if (chance(rng, o.preference)) p.preference = chance(rng, 0.5) ? 1 : -1;
      p.forbidden = chance(rng, o.forbid);
      p.taught_last_year = chance(rng, o.kappa);
      if (p.preference != 0 || p.forbidden || p.taught_last_year) spec.pairs.push_back(p);
      if (o.pins > 0 && chance(rng, o.pins)) {
        if (chance(rng, 0.5)) {
          spec.pins.push_back({p.ta_id, p.course_id, std::nullopt, std::nullopt});
        } else {
          const auto& task = spec.courses[c].tasks[uniform(rng, 0, static_cast<int>(spec.courses[c].tasks.size()) - 1)];
          spec.pins.push_back({p.ta_id, p.course_id, task.kind, uniform(rng, 0, task.total_hours)});
        }
      }
    }
  }
  return spec;
}

inline InstanceSpec random_spec(std::mt19937_64& rng, int max_tas, int max_courses, int max_tasks,
                                int max_tau) {
  RandomSpecOptions o;
  o.max_tas = max_tas;
  o.max_courses = max_courses;
  o.max_tasks = max_tasks;
  o.max_tau = max_tau;
  return random_spec(rng, o);
}

}  // namespace tap::test
