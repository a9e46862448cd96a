#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"
#include "tap/model.hpp"
#include "tap/solver.hpp"
#include "tap/verify.hpp"

using namespace tap;
using namespace tap::verify;
using tap::test::data_path;

namespace {

constexpr int kAdmin = 0, kExercise = 1, kLab = 3;

// small.json: anna (s0, year 5, target 10), ben (s1, target 7), cleo (s2, target 6);
// algebra (c0: admin 4, exercise 8 with two TAs), biology (c1: admin 3, lab 6).
Instance small() { return load_instance(data_path("small.json")); }

/// A schedule of small.json that breaks no hard rule.
Assignment clean(const Instance& inst) {
  Assignment a = Assignment::empty_for(inst);
  a.set_hours(0, 0, kAdmin, 4);
  a.set_hours(0, 0, kExercise, 4);
  a.set_hours(2, 0, kExercise, 4);
  a.set_hours(1, 1, kAdmin, 3);
  a.set_hours(1, 1, kLab, 4);
  a.set_hours(2, 1, kLab, 2);
  return a;
}

bool has(const Verdict& v, const std::string& family) {
  for (const auto& x : v.hard_violations)
    if (x.family == family) return true;
  return false;
}

InstanceSpec with(InstanceSpec spec, const std::function<void(InstanceSpec&)>& edit) {
  edit(spec);
  return spec;
}

}  // namespace

TEST(Verify, CleanScheduleIsStrictOk) {
  const Instance inst = small();
  const Verdict v = check(inst, clean(inst), Mode::strict);
  EXPECT_TRUE(v.strict_ok);
  // anna h=8 (target 10, year 5): Eq14 once. cleo teaches algebra (pref -1): Eq20.
  // cleo teaches 2 courses > soft 1: Eq18. exercise has 2 TAs, lab has 2 TAs > 1: Eq17 once.
  // New courses: ben biology and cleo biology are new, soft bound 0 but weight 0.
  EXPECT_EQ(v.violated_clauses_by_family.at("Eq14"), 1);
  EXPECT_EQ(v.violated_clauses_by_family.at("Eq20"), 1);
  EXPECT_EQ(v.violated_clauses_by_family.at("Eq18"), 1);
  EXPECT_EQ(v.violated_clauses_by_family.at("Eq17"), 1);
  EXPECT_EQ(v.violated_clauses_by_family.at("Eq16"), 2);
  EXPECT_EQ(v.soft_penalty_by_family.at("Eq16"), 0);
  EXPECT_EQ(v.total_objective, 30 + 1 + 5 + 1);
}

TEST(Verify, SoftScoresPerMode) {
  // One senior TA 40 hours over target with soft deviation 30.
  InstanceSpec spec;
  spec.bounds.annual_full_load = 100;
  spec.bounds.hard_dev = 100;
  spec.bounds.soft_dev = 30;
  spec.bounds.min_task_hours = 1;
  spec.weights.target_year5 = 0;
  spec.weights.soft_dev = 30;
  spec.tas = {{"t", 2, Fraction::of(1, 2), 0, 0}};
  CourseSpec course{"c", {{TaskKind::admin, 90, 1}}};
  spec.courses = {course};
  const Instance inst = Instance::from_spec(spec);
  Assignment a = Assignment::empty_for(inst);
  a.set_hours(0, 0, kAdmin, 90);
  EXPECT_EQ(score_soft(inst, a, PenaltyMode::indicator).at("Eq15"), 30);
  EXPECT_EQ(score_soft(inst, a, PenaltyMode::magnitude).at("Eq15"), 300);
}

TEST(Verify, ZeroWeightFamilyScoresZero) {
  const Instance inst = small();
  Assignment a = clean(inst);
  ASSERT_EQ(inst.weights().soft_new, 0);
  const auto count = soft_violations(inst, a);
  EXPECT_GE(count.at("Eq16"), 1);
  EXPECT_EQ(score_soft(inst, a, PenaltyMode::indicator).at("Eq16"), 0);
  EXPECT_EQ(score_soft(inst, a, PenaltyMode::magnitude).at("Eq16"), 0);
}

TEST(Verify, AdminSharedByTwo) {
  const Instance inst = small();
  Assignment a = clean(inst);
  a.set_hours(0, 0, kAdmin, 2);
  a.set_hours(2, 0, kAdmin, 2);
  const Verdict v = check(inst, a, Mode::audit);
  ASSERT_TRUE(has(v, "Eq13"));
  for (const auto& x : v.hard_violations) {
    if (x.family != "Eq13") continue;
    EXPECT_EQ(x.index, "c0");
    EXPECT_EQ(x.subject, "algebra");
    EXPECT_EQ(x.measured, 2);
    EXPECT_EQ(x.bound, 1);
  }
  EXPECT_FALSE(v.strict_ok);
  try {
    check(inst, a, Mode::strict);
    FAIL() << "strict mode accepted a violation";
  } catch (const HardViolation& e) {
    EXPECT_FALSE(e.verdict().strict_ok);
    EXPECT_TRUE(has(e.verdict(), "Eq13"));
  }
}

// One constructed violation per hard family.
TEST(Verify, DetectsEveryHardFamily) {
  const Instance base = small();
  const InstanceSpec spec = base.spec();
  struct Case {
    std::string family;
    Instance inst;
    std::function<void(Assignment&)> edit;
  };
  std::vector<Case> cases;
  cases.push_back({"Eq1", Instance::from_spec(with(spec, [](InstanceSpec& s) {
                     for (auto& pair : s.pairs)
                       if (pair.ta_id == "ben") pair.forbidden = true;
                   })),
                   [](Assignment&) {}});
  cases.push_back({"Eq5", base, [](Assignment& a) { a.set_hours(1, 1, kExercise, 2); }});
  cases.push_back({"Eq6", base, [](Assignment& a) { a.set_hours(1, 1, kLab, 5); }});
  cases.push_back({"Eq7", base, [](Assignment& a) {
                     a.set_hours(1, 1, kLab, 5);
                     a.set_hours(2, 1, kLab, 1);
                   }});
  cases.push_back({"Eq8", base, [](Assignment& a) {
                     a.set_hours(0, 0, kExercise, 8);
                     a.set_hours(2, 0, kExercise, 0);
                   }});
  cases.push_back({"Eq9", Instance::from_spec(with(spec, [](InstanceSpec& s) { s.bounds.hard_dev = 1;
                     s.bounds.soft_dev = 1; })),
                   [](Assignment&) {}});
  cases.push_back({"Eq10", Instance::from_spec(with(spec, [](InstanceSpec& s) { s.bounds.hard_courses_per_ta = 1; })),
                   [](Assignment&) {}});
  cases.push_back({"Eq11", Instance::from_spec(with(spec, [](InstanceSpec& s) { s.bounds.hard_tas_per_course = 1; })),
                   [](Assignment&) {}});
  cases.push_back({"Eq12", base, [](Assignment& a) {
                     a.set_hours(0, 0, kAdmin, 0);
                     a.set_hours(1, 0, kAdmin, 4);
                   }});
  cases.push_back({"Eq13", base, [](Assignment& a) {
                     a.set_hours(1, 1, kAdmin, 1);
                     a.set_hours(2, 1, kAdmin, 2);
                   }});
  cases.push_back({"pin", Instance::from_spec(with(spec, [](InstanceSpec& s) {
                     s.pins.push_back({"ben", "algebra", std::nullopt, std::nullopt});
                   })),
                   [](Assignment&) {}});
  cases.push_back({"pin", Instance::from_spec(with(spec, [](InstanceSpec& s) {
                     s.pins.push_back({"anna", "algebra", TaskKind::exercise, 6});
                   })),
                   [](Assignment&) {}});
  cases.push_back({"domain", base, [](Assignment& a) { a.set_hours(0, 0, kAdmin, -1); }});

  for (auto& c : cases) {
    Assignment a = clean(c.inst);
    c.edit(a);
    const Verdict v = check(c.inst, a, Mode::audit);
    EXPECT_TRUE(has(v, c.family)) << c.family << "\n" << to_json(v).dump(1);
    EXPECT_THROW(check(c.inst, a, Mode::strict), HardViolation) << c.family;
  }
}

// h, w and z are definitions of derived quantities (Eqs. 2-4). The model rows
// reject a valuation that disagrees with its hours; verify never reads them.
TEST(Verify, DefinitionalFamiliesComeFromHoursOnly) {
  const Instance inst = small();
  const auto ir = model::build(inst);
  const Assignment a = clean(inst);
  const model::Valuation good = model::valuation_of(ir, a);
  ASSERT_TRUE(model::evaluate(ir, good).feasible);
  auto broken = [&](int var) {
    model::Valuation v = good;
    v[var] = v[var] == 0 ? 1 : 0;
    const auto ev = model::evaluate(ir, v);
    EXPECT_FALSE(ev.feasible);
    return ev.first_violated ? ir.constraints[*ev.first_violated].origin.family : std::string();
  };
  EXPECT_EQ(broken(ir.layout.h[1]), "Eq2");
  EXPECT_EQ(broken(ir.layout.w_id(0, 0)), "Eq3");
  EXPECT_EQ(broken(ir.layout.z[0]), "Eq4");
  EXPECT_EQ(model::assignment_from_valuation(ir, good), a);
  EXPECT_TRUE(check(inst, a, Mode::strict).strict_ok);
}

TEST(Verify, IndexMismatch) {
  const Instance inst = small();
  EXPECT_THROW(check(inst, Assignment(2, 2), Mode::audit), IndexMismatch);
  EXPECT_THROW(score_soft(inst, Assignment(3, 1), PenaltyMode::indicator), IndexMismatch);
}

// Relabeling the TAs leaves the verdict unchanged up to the relabeling.
TEST(Verify, PermutationInvariant) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 100; ++round) {
    const InstanceSpec spec = tap::test::random_spec(rng, 4, 3, 3, 10);
    const Instance inst = Instance::from_spec(spec);
    Assignment a = Assignment::empty_for(inst);
    for (int s = 0; s < inst.num_tas(); ++s)
      for (int c = 0; c < inst.num_courses(); ++c)
        for (int t = 0; t < kTaskKinds; ++t)
          if (inst.task_hours(c, t) && tap::test::chance(rng, 0.4))
            a.set_hours(s, c, t, tap::test::uniform(rng, 0, inst.task_hours(c, t)));
    std::vector<int> perm(inst.num_tas());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    InstanceSpec moved = spec;
    for (int s = 0; s < inst.num_tas(); ++s) moved.tas[perm[s]] = spec.tas[s];
    const Instance inst2 = Instance::from_spec(moved);
    Assignment b = Assignment::empty_for(inst2);
    for (int s = 0; s < inst.num_tas(); ++s)
      for (int c = 0; c < inst.num_courses(); ++c)
        for (int t = 0; t < kTaskKinds; ++t) b.set_hours(perm[s], c, t, a.hours(s, c, t));
    const Verdict v1 = check(inst, a, Mode::audit);
    const Verdict v2 = check(inst2, b, Mode::audit);
    EXPECT_EQ(v1.total_objective, v2.total_objective);
    EXPECT_EQ(v1.soft_penalty_by_family, v2.soft_penalty_by_family);
    EXPECT_EQ(v1.violated_clauses_by_family, v2.violated_clauses_by_family);
    EXPECT_EQ(v1.hard_counts(), v2.hard_counts());
    auto subjects = [](const Verdict& v) {
      std::multiset<std::string> out;
      for (const auto& x : v.hard_violations) out.insert(x.family + x.subject + std::to_string(x.measured));
      return out;
    };
    EXPECT_EQ(subjects(v1), subjects(v2));
  }
}

// Every valuation the exhaustive enumeration accepts scores the same in the
// model and in the verifier, and the verifier finds nothing wrong with it.
TEST(Verify, AgreesWithModelOnEveryFeasibleValuation) {
  std::mt19937_64 rng(12);
  std::size_t valuations = 0;
  for (int round = 0; round < 200; ++round) {
    tap::test::RandomSpecOptions o;
    o.max_tas = 3;
    o.max_courses = 2;
    o.max_tasks = 2;
    o.max_tau = 6;
    o.pins = round % 4 == 0 ? 0.2 : 0.0;
    o.mode = round % 2 ? PenaltyMode::magnitude : PenaltyMode::indicator;
    const Instance inst = Instance::from_spec(tap::test::random_spec(rng, o));
    const auto ir = model::build(inst);
    try {
      solver::enumerate_feasible(ir, 2'000'000, [&](const model::Valuation& values) {
        ++valuations;
        const Assignment a = model::assignment_from_valuation(ir, values);
        const Verdict v = check(inst, a, Mode::audit);
        ASSERT_TRUE(v.strict_ok) << to_json(v).dump();
        ASSERT_EQ(v.total_objective, model::objective_value(ir, values));
      });
    } catch (const solver::BudgetExceeded&) {
    }
  }
  EXPECT_GT(valuations, 200u);
}

TEST(Verify, VerdictJson) {
  const Instance inst = small();
  Assignment a = clean(inst);
  a.set_hours(2, 0, kAdmin, 1);
  const Json doc = to_json(check(inst, a, Mode::audit));
  EXPECT_FALSE(doc["strict_ok"].get<bool>());
  EXPECT_EQ(doc["hard_counts"]["Eq13"], 1);
  EXPECT_EQ(doc["soft_penalty_by_family"].size(), 7u);
  EXPECT_EQ(doc["hard_violations"][0].contains("measured"), true);
}
