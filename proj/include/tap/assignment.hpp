#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tap/instance.hpp"

namespace tap {

/// Candidate schedule: hours per (TA, course, task kind). Every other decision
/// quantity is a function of the hours and is computed on request.
class Assignment {
 public:
  Assignment() = default;
  Assignment(int num_tas, int num_courses)
      : num_tas_(num_tas),
        num_courses_(num_courses),
        hours_(static_cast<std::size_t>(num_tas) * num_courses * kTaskKinds, 0) {}

  static Assignment empty_for(const Instance& instance) {
    return Assignment(instance.num_tas(), instance.num_courses());
  }

  int num_tas() const { return num_tas_; }
  int num_courses() const { return num_courses_; }

  int hours(int s, int c, int t) const { return hours_[index(s, c, t)]; }
  void set_hours(int s, int c, int t, int value) { hours_[index(s, c, t)] = value; }

  /// y[s,c,t]
  bool teaches_task(int s, int c, int t) const { return hours(s, c, t) > 0; }
  /// w[s,c]
  bool teaches_course(int s, int c) const {
    for (int t = 0; t < kTaskKinds; ++t) {
      if (hours(s, c, t) > 0) return true;
    }
    return false;
  }
  /// h[s]
  int total_hours(int s) const {
    int sum = 0;
    for (int c = 0; c < num_courses_; ++c) {
      for (int t = 0; t < kTaskKinds; ++t) sum += hours(s, c, t);
    }
    return sum;
  }
  /// n[c,t]
  int staff(int c, int t) const {
    int n = 0;
    for (int s = 0; s < num_tas_; ++s) n += hours(s, c, t) > 0 ? 1 : 0;
    return n;
  }
  int courses_taught(int s) const {
    int k = 0;
    for (int c = 0; c < num_courses_; ++c) k += teaches_course(s, c) ? 1 : 0;
    return k;
  }
  /// z[s]: courses taught that were not taught by this TA last year.
  int new_courses(const Instance& instance, int s) const {
    int k = 0;
    for (int c = 0; c < num_courses_; ++c) {
      if (teaches_course(s, c) && !instance.taught_last_year(s, c)) ++k;
    }
    return k;
  }

  const std::vector<int>& raw_hours() const { return hours_; }
  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::size_t index(int s, int c, int t) const {
    return (static_cast<std::size_t>(s) * num_courses_ + c) * kTaskKinds + t;
  }

  int num_tas_ = 0;
  int num_courses_ = 0;
  std::vector<int> hours_;
};

/// Name of the hours variable of a cell in every exchange format: x_s<i>_c<j>_t<k>.
std::string hours_var_name(int s, int c, int t);

/// Solution file text: `#` comment lines, then one `name value` line per hours
/// cell. Byte-identical for identical assignments and comments.
std::string format_solution(const Assignment& assignment, const std::vector<std::string>& comments = {});

}  // namespace tap
