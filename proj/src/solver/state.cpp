#include "solver/state.hpp"

namespace tap::solver::detail {

SupportState::SupportState(const Problem& p)
    : p_(p),
      value_(p.cell.size(), -1),
      in_(p.K, 0),
      open_(p.K, 0),
      sum_lo_(p.K, 0),
      sum_hi_in_(p.K, 0),
      sum_hi_open_(p.K, 0),
      in_course_(static_cast<std::size_t>(p.S) * p.C, 0),
      open_course_(in_course_.size(), 0),
      courses_(p.S, 0),
      new_(p.S, 0),
      tas_on_(p.C, 0),
      hmin_(p.S, 0),
      hmax_(p.S, 0),
      hours_part_(p.S, 0) {
  for (int s = 0; s < p.S; ++s) {
    for (int k = 0; k < p.K; ++k) {
      const std::size_t i = p.sk(s, k);
      const int c = p.tasks[k].c;
      if (p.cell[i] == Cell::blocked) {
        value_[i] = 0;
        continue;
      }
      // Count as undecided first, then decide forced cells through apply.
      ++open_[k];
      sum_hi_open_[k] += p.cell_hi[i];
      ++open_course_[p.sc(s, c)];
      hmax_[s] += p.cell_hi[i];
      if (p.cell[i] == Cell::forced) {
        value_[i] = 1;
        apply(s, k, 1, +1);
      }
    }
  }
  for (int s = 0; s < p.S; ++s) {
    support_cost_ += ta_support(s);
    for (int c = 0; c < p.C; ++c) support_cost_ += pair_support(s, c);
    hours_part_[s] = ta_hours(s);
    hours_bound_ += hours_part_[s];
  }
  for (int k = 0; k < p.K; ++k) support_cost_ += task_support(k);
}

std::int64_t SupportState::excess(std::int64_t over, std::int64_t weight) const {
  if (over <= 0) return 0;
  return p_.mode == PenaltyMode::indicator ? weight : weight * over;
}

std::int64_t SupportState::ta_support(int s) const {
  return excess(new_[s] - p_.bounds.soft_new_courses, p_.weights.soft_new) +
         excess(courses_[s] - p_.bounds.soft_courses_per_ta, p_.weights.soft_courses);
}

std::int64_t SupportState::task_support(int k) const {
  const TaskInfo& t = p_.tasks[k];
  return excess(in_[k] - t.rho - p_.bounds.soft_extra_tas_per_task, p_.weights.soft_staff);
}

std::int64_t SupportState::pair_support(int s, int c) const {
  const std::size_t i = p_.sc(s, c);
  if (p_.pref[i] > 0 && in_course_[i] == 0 && open_course_[i] == 0) return p_.weights.pref_positive;
  if (p_.pref[i] < 0 && in_course_[i] > 0) return p_.weights.pref_negative;
  return 0;
}

std::int64_t SupportState::ta_hours(int s) const {
  const std::int64_t v = p_.min_hours_cost(s, hmin_[s], hmax_[s]);
  return v < 0 ? 0 : v;
}

void SupportState::apply(int s, int k, int v, int sign) {
  const std::size_t i = p_.sk(s, k);
  const int c = p_.tasks[k].c;
  const std::size_t pc = p_.sc(s, c);
  const std::int64_t lo = p_.cell_lo[i];
  const std::int64_t hi = p_.cell_hi[i];
  open_[k] -= sign;
  sum_hi_open_[k] -= sign * hi;
  open_course_[pc] -= sign;
  hmax_[s] -= sign * hi;
  if (v != 1) return;
  in_[k] += sign;
  sum_lo_[k] += sign * lo;
  sum_hi_in_[k] += sign * hi;
  hmin_[s] += sign * lo;
  hmax_[s] += sign * hi;
  const int before = in_course_[pc];
  in_course_[pc] += sign;
  if ((before == 0) != (in_course_[pc] == 0)) {
    courses_[s] += sign;
    tas_on_[c] += sign;
    if (!p_.kappa[pc]) new_[s] += sign;
  }
}

bool SupportState::assign(int s, int k, int v) {
  const int c = p_.tasks[k].c;
  const std::int64_t before = ta_support(s) + task_support(k) + pair_support(s, c);
  value_[p_.sk(s, k)] = static_cast<std::int8_t>(v);
  apply(s, k, v, +1);
  support_cost_ += ta_support(s) + task_support(k) + pair_support(s, c) - before;
  const std::int64_t hours = ta_hours(s);
  hours_bound_ += hours - hours_part_[s];
  hours_part_[s] = hours;
  return check(s, k);
}

void SupportState::undo(int s, int k) {
  const std::size_t i = p_.sk(s, k);
  const int c = p_.tasks[k].c;
  const std::int64_t before = ta_support(s) + task_support(k) + pair_support(s, c);
  apply(s, k, value_[i], -1);
  value_[i] = -1;
  support_cost_ += ta_support(s) + task_support(k) + pair_support(s, c) - before;
  const std::int64_t hours = ta_hours(s);
  hours_bound_ += hours - hours_part_[s];
  hours_part_[s] = hours;
}

bool SupportState::fail(const char* family, Subject subject, int a, int b) const {
  conflict_family_ = family;
  conflict_subject_ = subject;
  conflict_a_ = a;
  conflict_b_ = b;
  return false;
}

std::string SupportState::conflict() const {
  std::string out = conflict_family_;
  switch (conflict_subject_) {
    case Subject::ta: return out + "[s" + std::to_string(conflict_a_) + "]";
    case Subject::course: return out + "[c" + std::to_string(conflict_a_) + "]";
    case Subject::task: {
      const TaskInfo& t = p_.tasks[conflict_a_];
      return out + "[c" + std::to_string(t.c) + ",t" + std::to_string(t.t) + "]";
    }
    case Subject::pair:
      return out + "[s" + std::to_string(conflict_a_) + ",c" + std::to_string(conflict_b_) + "]";
  }
  return out;
}

bool SupportState::check_task(int k) const {
  const TaskInfo& t = p_.tasks[k];
  if (t.admin && in_[k] > 1) return fail("Eq13", Subject::course, t.c);
  if (in_[k] + open_[k] < t.need) return fail(in_[k] + open_[k] == 0 ? "Eq6" : "Eq8", Subject::task, k);
  if (sum_lo_[k] > t.tau) return fail("Eq6", Subject::task, k);
  if (sum_hi_in_[k] + sum_hi_open_[k] < t.tau) return fail("Eq6", Subject::task, k);
  return true;
}

bool SupportState::check_ta(int s) const {
  if (courses_[s] > p_.bounds.hard_courses_per_ta) return fail("Eq10", Subject::ta, s);
  if (new_[s] > p_.bounds.hard_new_courses) return fail("Eq12", Subject::ta, s);
  if (hmin_[s] > p_.hard_hi[s] || hmax_[s] < p_.hard_lo[s]) return fail("Eq9", Subject::ta, s);
  return true;
}

bool SupportState::check_pair(int s, int c) const {
  const std::size_t i = p_.sc(s, c);
  if (tas_on_[c] > p_.bounds.hard_tas_per_course) return fail("Eq11", Subject::course, c);
  if (p_.course_pin[i] && in_course_[i] == 0 && open_course_[i] == 0) return fail("pin", Subject::pair, s, c);
  return true;
}

bool SupportState::check(int s, int k) const {
  return check_task(k) && check_ta(s) && check_pair(s, p_.tasks[k].c);
}

bool SupportState::consistent() const {
  for (int k = 0; k < p_.K; ++k)
    if (!check_task(k)) return false;
  for (int s = 0; s < p_.S; ++s)
    if (!check_ta(s)) return false;
  for (int s = 0; s < p_.S; ++s)
    for (int c = 0; c < p_.C; ++c)
      if (!check_pair(s, c)) return false;
  return true;
}

std::vector<std::uint8_t> SupportState::support() const {
  std::vector<std::uint8_t> y(value_.size());
  for (std::size_t i = 0; i < value_.size(); ++i) y[i] = value_[i] == 1 ? 1 : 0;
  return y;
}

}  // namespace tap::solver::detail
