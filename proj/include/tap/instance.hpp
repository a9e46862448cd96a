#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tap/error.hpp"

namespace tap {

using Json = nlohmann::ordered_json;

/// Number of task kinds every course is laid out over. Absent tasks have zero hours.
inline constexpr int kTaskKinds = 10;

enum class TaskKind : std::uint8_t {
  admin = 0,
  exercise,
  problem_solving,
  lab,
  computer,
  assignment_supervision,
  assignment_evaluation,
  project_supervision,
  exam_evaluation,
  other,
};

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view name);

/// Non-negative rational, reduced. Parsed from decimals with at most six places.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction from_double(double value);
  static Fraction of(std::int64_t num, std::int64_t den);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct TeachingAssistant {
  std::string id;
  int year = 1;
  Fraction employment_fraction;
  int carryover_hours = 0;
  int target_hours = 0;  // derived on validation
};

struct CourseTask {
  TaskKind kind = TaskKind::admin;
  int total_hours = 0;
  int required_tas = 0;
};

struct CourseSpec {
  std::string id;
  std::vector<CourseTask> tasks;
};

struct PairData {
  std::string ta_id;
  std::string course_id;
  int preference = 0;
  bool forbidden = false;
  bool taught_last_year = false;
};

/// A planner decision that must hold in every solution. With `task` and `hours`
/// set it fixes the hours of one cell; with both empty it requires the TA to
/// teach the course.
struct Pin {
  std::string ta_id;
  std::string course_id;
  std::optional<TaskKind> task;
  std::optional<int> hours;
  friend bool operator==(const Pin&, const Pin&) = default;
};

struct BoundConfig {
  int hard_dev = 100;
  int soft_dev = 50;
  int hard_new_courses = 1;
  int soft_new_courses = 0;
  int hard_courses_per_ta = 2;
  int soft_courses_per_ta = 1;
  int hard_tas_per_course = 8;
  int soft_extra_tas_per_task = 0;
  int min_task_hours = 5;
  int annual_full_load = 350;

  /// Hard values for one of the dataset years 2022..2026, soft values derived.
  static BoundConfig for_year(int year);
  friend bool operator==(const BoundConfig&, const BoundConfig&) = default;
};

enum class PenaltyMode { indicator, magnitude };

std::string_view to_string(PenaltyMode mode);
std::optional<PenaltyMode> penalty_mode_from_string(std::string_view name);

struct WeightConfig {
  int target_year5 = 30;
  int soft_dev = 30;
  int soft_new = 0;
  int soft_staff = 1;
  int soft_courses = 5;
  int pref_positive = 1;
  int pref_negative = 1;
  PenaltyMode penalty_mode = PenaltyMode::indicator;

  friend bool operator==(const WeightConfig&, const WeightConfig&) = default;
};

/// Raw, mutable description of an instance as it appears on disk.
struct InstanceSpec {
  std::string label;
  std::vector<TeachingAssistant> tas;
  std::vector<CourseSpec> courses;
  std::vector<PairData> pairs;
  std::vector<Pin> pins;
  BoundConfig bounds;
  WeightConfig weights;
};

/// round_half_up(fraction * annual_full_load) + carryover.
int compute_target(Fraction employment_fraction, int carryover, int annual_full_load);

/// Validated, immutable instance with dense lookup tables.
class Instance {
 public:
  /// Validates `spec` and derives target hours. Throws ValidationError.
  static Instance from_spec(InstanceSpec spec);

  const InstanceSpec& spec() const { return spec_; }
  const std::string& label() const { return spec_.label; }
  const BoundConfig& bounds() const { return spec_.bounds; }
  const WeightConfig& weights() const { return spec_.weights; }
  const std::vector<TeachingAssistant>& tas() const { return spec_.tas; }

  int num_tas() const { return static_cast<int>(spec_.tas.size()); }
  int num_courses() const { return static_cast<int>(spec_.courses.size()); }
  const std::string& ta_id(int s) const { return spec_.tas[s].id; }
  const std::string& course_id(int c) const { return spec_.courses[c].id; }
  std::optional<int> ta_index(std::string_view id) const;
  std::optional<int> course_index(std::string_view id) const;

  int target(int s) const { return spec_.tas[s].target_hours; }
  int year(int s) const { return spec_.tas[s].year; }
  int task_hours(int c, int t) const { return hours_[cell(c, t)]; }
  int required_tas(int c, int t) const { return required_[cell(c, t)]; }
  int preference(int s, int c) const { return preference_[pair(s, c)]; }
  bool forbidden(int s, int c) const { return forbidden_[pair(s, c)] != 0; }
  bool taught_last_year(int s, int c) const { return kappa_[pair(s, c)] != 0; }
  /// Pinned hours of a cell, or nullopt.
  std::optional<int> pinned_hours(int s, int c, int t) const;
  bool pinned_course(int s, int c) const { return pinned_course_[pair(s, c)] != 0; }

 private:
  std::size_t cell(int c, int t) const { return static_cast<std::size_t>(c) * kTaskKinds + t; }
  std::size_t pair(int s, int c) const {
    return static_cast<std::size_t>(s) * spec_.courses.size() + c;
  }

  InstanceSpec spec_;
  std::vector<int> hours_;
  std::vector<int> required_;
  std::vector<int> preference_;
  std::vector<std::uint8_t> forbidden_;
  std::vector<std::uint8_t> kappa_;
  std::vector<int> pinned_hours_;  // -1 when not pinned
  std::vector<std::uint8_t> pinned_course_;
};

// ---- serialization -------------------------------------------------------

/// Parses the instance document. ParseError on malformed input,
/// ValidationError on domain violations.
Instance parse_instance(std::string_view text);
Instance instance_from_json(const Json& doc);
Instance load_instance(const std::filesystem::path& path);

/// Canonical document: fixed field order, all bounds and weights explicit,
/// sparse pairs sorted by (ta, course) and only non-default entries kept.
Json to_json(const Instance& instance);
std::string serialize_instance(const Instance& instance);
void save_instance(const Instance& instance, const std::filesystem::path& path);

Json to_json(const BoundConfig& bounds);
Json to_json(const WeightConfig& weights);
Json to_json(const Pin& pin);
BoundConfig bounds_from_json(const Json& doc, std::optional<int> preset_year = std::nullopt);
WeightConfig weights_from_json(const Json& doc);
Pin pin_from_json(const Json& doc);

// ---- diagnostics ---------------------------------------------------------

struct CapacityReport {
  std::int64_t demand_hours = 0;   // sum of task hours
  std::int64_t target_hours = 0;   // sum of targets
  std::int64_t slack = 0;          // sum(target + hard_dev) - demand
  bool warning = false;            // slack < 0
};

CapacityReport capacity_report(const Instance& instance);

}  // namespace tap
