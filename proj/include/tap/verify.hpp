#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tap/assignment.hpp"
#include "tap/instance.hpp"

namespace tap::verify {

class IndexMismatch : public Error {
 public:
  using Error::Error;
};

/// One failed hard check. `index` uses dense indices ("s0,c1,t2"), `subject`
/// the matching ids ("anna,algebra,exercise").
struct Violation {
  std::string family;  // "Eq1".."Eq13", "pin" or "domain"
  std::string index;
  std::string subject;
  std::int64_t measured = 0;
  std::int64_t bound = 0;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct Verdict {
  std::vector<Violation> hard_violations;
  /// "Eq14".."Eq20", every family present.
  std::map<std::string, std::int64_t> soft_penalty_by_family;
  /// Violated soft clauses per family, independent of weights and mode.
  std::map<std::string, int> violated_clauses_by_family;
  std::int64_t total_objective = 0;
  bool strict_ok = true;
  PenaltyMode mode = PenaltyMode::indicator;

  std::map<std::string, int> hard_counts() const;
};

class HardViolation : public Error {
 public:
  explicit HardViolation(Verdict verdict);
  const Verdict& verdict() const noexcept { return verdict_; }

 private:
  Verdict verdict_;
};

enum class Mode { strict, audit };

/// Recomputes y, w, h, n, z from the hours alone and checks every hard rule.
/// Strict mode throws HardViolation when anything fails; audit mode reports.
Verdict check(const Instance& instance, const Assignment& assignment, Mode mode);

/// Penalty per soft family under `mode` with the instance's weights.
std::map<std::string, std::int64_t> score_soft(const Instance& instance, const Assignment& assignment,
                                               PenaltyMode mode);

/// Violated clauses per soft family.
std::map<std::string, int> soft_violations(const Instance& instance, const Assignment& assignment);

Json to_json(const Verdict& verdict);

}  // namespace tap::verify
