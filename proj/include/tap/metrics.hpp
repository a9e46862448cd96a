#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tap/assignment.hpp"
#include "tap/instance.hpp"

namespace tap::metrics {

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class LabelMismatch : public Error {
 public:
  using Error::Error;
};

/// sqrt(mean((assigned - target)^2)).
double rmse(const std::vector<std::int64_t>& targets, const std::vector<std::int64_t>& assigned);

struct ScatterPoint {
  std::string ta;
  std::int64_t target = 0;
  std::int64_t assigned = 0;
};

struct Report {
  std::string label;   // instance label
  std::string source;  // solver name or "manual"
  double rmse = 0;
  std::vector<ScatterPoint> scatter;
  /// Number of courses (new courses) -> TA ids with that count.
  std::map<int, std::vector<std::string>> course_histogram;
  std::map<int, std::vector<std::string>> new_course_histogram;
  /// Filled from the audit run inside build_report.
  std::int64_t objective = 0;
  bool strict_ok = true;
  int hard_violations = 0;
  /// Solver status and time; absent for manual schedules.
  std::string status;
  std::optional<double> seconds;
};

/// Audits the schedule and collects the series behind the workload scatter
/// and the course histograms.
Report build_report(const Instance& instance, const Assignment& assignment, std::string source,
                     std::string status = "", std::optional<double> seconds = std::nullopt);

struct Comparison {
  std::string label;
  std::vector<Report> rows;

  /// source,status,rmse,time,objective,hard_violations
  std::string csv() const;
  /// Aligned columns; missing times print as "-".
  std::string text() const;
};

Comparison compare(const std::vector<Report>& reports);

Json to_json(const Report& report);
/// ta,target,assigned
std::string scatter_csv(const Report& report);
/// kind,count,num_tas with kind "courses" or "new_courses"
std::string histogram_csv(const Report& report);

}  // namespace tap::metrics
