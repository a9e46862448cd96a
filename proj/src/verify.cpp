// Audit of a schedule straight from the definitions. Everything here is
// recomputed from the hours; nothing is shared with the model or the search.

#include "tap/verify.hpp"

#include <algorithm>
#include <cstdlib>

namespace tap::verify {

namespace {

constexpr const char* kSoftTags[] = {"Eq14", "Eq15", "Eq16", "Eq17", "Eq18", "Eq19", "Eq20"};

struct Derived {
  int S = 0;
  int C = 0;
  std::vector<std::int64_t> h;        // per TA
  std::vector<int> w;                 // s * C + c
  std::vector<int> n;                 // c * kTaskKinds + t
  std::vector<int> courses, fresh;    // per TA
  std::vector<int> tas_on;            // per course
  std::vector<std::int64_t> load;     // c * kTaskKinds + t, sum of hours
};

Derived derive(const Instance& inst, const Assignment& a) {
  Derived d;
  d.S = inst.num_tas();
  d.C = inst.num_courses();
  d.h.assign(d.S, 0);
  d.w.assign(static_cast<std::size_t>(d.S) * d.C, 0);
  d.n.assign(static_cast<std::size_t>(d.C) * kTaskKinds, 0);
  d.load.assign(d.n.size(), 0);
  d.courses.assign(d.S, 0);
  d.fresh.assign(d.S, 0);
  d.tas_on.assign(d.C, 0);
  for (int s = 0; s < d.S; ++s) {
    for (int c = 0; c < d.C; ++c) {
      bool any = false;
      for (int t = 0; t < kTaskKinds; ++t) {
        const int x = a.hours(s, c, t);
        d.h[s] += x;
        d.load[c * kTaskKinds + t] += x;
        if (x > 0) {
          any = true;
          ++d.n[c * kTaskKinds + t];
        }
      }
      if (!any) continue;
      d.w[s * d.C + c] = 1;
      ++d.courses[s];
      ++d.tas_on[c];
      if (!inst.taught_last_year(s, c)) ++d.fresh[s];
    }
  }
  return d;
}

std::string idx_s(int s) { return "s" + std::to_string(s); }
std::string idx_c(int c) { return "c" + std::to_string(c); }
std::string idx_sc(int s, int c) { return idx_s(s) + "," + idx_c(c); }
std::string idx_ct(int c, int t) { return idx_c(c) + ",t" + std::to_string(t); }
std::string idx_sct(int s, int c, int t) { return idx_sc(s, c) + ",t" + std::to_string(t); }

std::string kind_name(int t) { return std::string(to_string(static_cast<TaskKind>(t))); }

void ensure_shape(const Instance& inst, const Assignment& a) {
  if (a.num_tas() != inst.num_tas() || a.num_courses() != inst.num_courses()) {
    throw IndexMismatch("assignment is " + std::to_string(a.num_tas()) + "x" + std::to_string(a.num_courses()) +
                        ", instance is " + std::to_string(inst.num_tas()) + "x" +
                        std::to_string(inst.num_courses()));
  }
}

std::int64_t dev(const Instance& inst, const Derived& d, int s) { return std::llabs(d.h[s] - inst.target(s)); }

std::int64_t over(std::int64_t value, std::int64_t limit) { return std::max<std::int64_t>(0, value - limit); }

/// Per family: violation amount of every soft clause (0 = satisfied).
std::map<std::string, std::vector<std::int64_t>> soft_excess(const Instance& inst, const Derived& d) {
  const BoundConfig& b = inst.bounds();
  std::map<std::string, std::vector<std::int64_t>> out;
  for (const char* tag : kSoftTags) out[tag];
  for (int s = 0; s < d.S; ++s) {
    if (inst.year(s) >= 5) out["Eq14"].push_back(dev(inst, d, s));
    out["Eq15"].push_back(over(dev(inst, d, s), b.soft_dev));
    out["Eq16"].push_back(over(d.fresh[s], b.soft_new_courses));
    out["Eq18"].push_back(over(d.courses[s], b.soft_courses_per_ta));
    for (int c = 0; c < d.C; ++c) {
      const int pref = inst.preference(s, c);
      const int w = d.w[s * d.C + c];
      if (pref > 0) out["Eq19"].push_back(w == 0 ? 1 : 0);
      if (pref < 0) out["Eq20"].push_back(w == 1 ? 1 : 0);
    }
  }
  for (int c = 0; c < d.C; ++c) {
    for (int t = 0; t < kTaskKinds; ++t) {
      if (inst.task_hours(c, t) == 0) continue;
      out["Eq17"].push_back(
          over(d.n[c * kTaskKinds + t], static_cast<std::int64_t>(inst.required_tas(c, t)) + b.soft_extra_tas_per_task));
    }
  }
  return out;
}

int weight_of(const WeightConfig& w, const std::string& tag) {
  if (tag == "Eq14") return w.target_year5;
  if (tag == "Eq15") return w.soft_dev;
  if (tag == "Eq16") return w.soft_new;
  if (tag == "Eq17") return w.soft_staff;
  if (tag == "Eq18") return w.soft_courses;
  if (tag == "Eq19") return w.pref_positive;
  return w.pref_negative;
}

std::map<std::string, std::int64_t> score(const Instance& inst, const Derived& d, PenaltyMode mode) {
  std::map<std::string, std::int64_t> out;
  for (const auto& [tag, excess] : soft_excess(inst, d)) {
    const std::int64_t weight = weight_of(inst.weights(), tag);
    std::int64_t total = 0;
    for (std::int64_t e : excess) {
      if (e == 0) continue;
      total += mode == PenaltyMode::indicator ? weight : weight * e;
    }
    out[tag] = total;
  }
  return out;
}

std::vector<Violation> hard(const Instance& inst, const Assignment& a, const Derived& d) {
  const BoundConfig& b = inst.bounds();
  std::vector<Violation> out;
  auto add = [&](const char* family, std::string index, std::string subject, std::int64_t measured,
                 std::int64_t bound) {
    out.push_back({family, std::move(index), std::move(subject), measured, bound});
  };
  const int admin = static_cast<int>(TaskKind::admin);

  for (int s = 0; s < d.S; ++s) {
    for (int c = 0; c < d.C; ++c) {
      const std::string sc = inst.ta_id(s) + "," + inst.course_id(c);
      std::int64_t on_course = 0;
      for (int t = 0; t < kTaskKinds; ++t) {
        const int x = a.hours(s, c, t);
        const int tau = inst.task_hours(c, t);
        on_course += x;
        const std::string sct = sc + "," + kind_name(t);
        if (x < 0) add("domain", idx_sct(s, c, t), sct, x, 0);
        if (tau == 0 && x != 0) add("Eq5", idx_sct(s, c, t), sct, x, 0);
        if (tau > 0 && x > tau) add("domain", idx_sct(s, c, t), sct, x, tau);
        const int least = std::min(tau, b.min_task_hours);
        if (tau > 0 && x > 0 && x < least) add("Eq7", idx_sct(s, c, t), sct, x, least);
        if (auto pin = inst.pinned_hours(s, c, t); pin && x != *pin) add("pin", idx_sct(s, c, t), sct, x, *pin);
      }
      if (inst.forbidden(s, c) && on_course != 0) add("Eq1", idx_sc(s, c), sc, on_course, 0);
      if (inst.pinned_course(s, c) && !d.w[s * d.C + c]) add("pin", idx_sc(s, c), sc, 0, 1);
    }
  }
  for (int c = 0; c < d.C; ++c) {
    for (int t = 0; t < kTaskKinds; ++t) {
      const int tau = inst.task_hours(c, t);
      if (tau == 0) continue;
      const std::string ct = inst.course_id(c) + "," + kind_name(t);
      const std::int64_t load = d.load[c * kTaskKinds + t];
      if (load != tau) add("Eq6", idx_ct(c, t), ct, load, tau);
      const int n = d.n[c * kTaskKinds + t];
      if (n < inst.required_tas(c, t)) add("Eq8", idx_ct(c, t), ct, n, inst.required_tas(c, t));
    }
  }
  for (int s = 0; s < d.S; ++s) {
    const std::int64_t deviation = dev(inst, d, s);
    if (deviation > b.hard_dev) add("Eq9", idx_s(s), inst.ta_id(s), deviation, b.hard_dev);
    if (d.courses[s] > b.hard_courses_per_ta)
      add("Eq10", idx_s(s), inst.ta_id(s), d.courses[s], b.hard_courses_per_ta);
    if (d.fresh[s] > b.hard_new_courses) add("Eq12", idx_s(s), inst.ta_id(s), d.fresh[s], b.hard_new_courses);
  }
  for (int c = 0; c < d.C; ++c) {
    if (d.tas_on[c] > b.hard_tas_per_course) add("Eq11", idx_c(c), inst.course_id(c), d.tas_on[c], b.hard_tas_per_course);
    const int n_admin = d.n[c * kTaskKinds + admin];
    if (n_admin > 1) add("Eq13", idx_c(c), inst.course_id(c), n_admin, 1);
  }
  return out;
}

}  // namespace

std::map<std::string, int> Verdict::hard_counts() const {
  std::map<std::string, int> out;
  for (const auto& v : hard_violations) ++out[v.family];
  return out;
}

HardViolation::HardViolation(Verdict verdict)
    : Error([&] {
        const Violation& v = verdict.hard_violations.front();
        return "hard violation " + v.family + "[" + v.index + "] (" + v.subject +
               "): measured " + std::to_string(v.measured) + ", bound " + std::to_string(v.bound);
      }()),
      verdict_(std::move(verdict)) {}

Verdict check(const Instance& instance, const Assignment& assignment, Mode mode) {
  ensure_shape(instance, assignment);
  const Derived d = derive(instance, assignment);
  Verdict v;
  v.mode = instance.weights().penalty_mode;
  v.hard_violations = hard(instance, assignment, d);
  v.strict_ok = v.hard_violations.empty();
  v.soft_penalty_by_family = score(instance, d, v.mode);
  for (const auto& [tag, excess] : soft_excess(instance, d))
    v.violated_clauses_by_family[tag] =
        static_cast<int>(std::count_if(excess.begin(), excess.end(), [](std::int64_t e) { return e > 0; }));
  for (const auto& [tag, p] : v.soft_penalty_by_family) v.total_objective += p;
  if (mode == Mode::strict && !v.strict_ok) throw HardViolation(std::move(v));
  return v;
}

std::map<std::string, std::int64_t> score_soft(const Instance& instance, const Assignment& assignment,
                                               PenaltyMode mode) {
  ensure_shape(instance, assignment);
  return score(instance, derive(instance, assignment), mode);
}

std::map<std::string, int> soft_violations(const Instance& instance, const Assignment& assignment) {
  ensure_shape(instance, assignment);
  std::map<std::string, int> out;
  for (const auto& [tag, excess] : soft_excess(instance, derive(instance, assignment)))
    out[tag] = static_cast<int>(std::count_if(excess.begin(), excess.end(), [](std::int64_t e) { return e > 0; }));
  return out;
}

Json to_json(const Verdict& verdict) {
  Json doc;
  doc["strict_ok"] = verdict.strict_ok;
  doc["penalty_mode"] = std::string(to_string(verdict.mode));
  doc["total_objective"] = verdict.total_objective;
  doc["soft_penalty_by_family"] = Json::object();
  for (const auto& [tag, p] : verdict.soft_penalty_by_family) doc["soft_penalty_by_family"][tag] = p;
  doc["violated_clauses_by_family"] = Json::object();
  for (const auto& [tag, n] : verdict.violated_clauses_by_family) doc["violated_clauses_by_family"][tag] = n;
  doc["hard_counts"] = Json::object();
  for (const auto& [tag, n] : verdict.hard_counts()) doc["hard_counts"][tag] = n;
  doc["hard_violations"] = Json::array();
  for (const auto& v : verdict.hard_violations) {
    doc["hard_violations"].push_back(
        {{"family", v.family}, {"index", v.index}, {"subject", v.subject}, {"measured", v.measured}, {"bound", v.bound}});
  }
  return doc;
}

}  // namespace tap::verify
