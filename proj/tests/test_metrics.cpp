#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "tap/metrics.hpp"
#include "tap/verify.hpp"

using namespace tap;
using namespace tap::metrics;
using tap::test::data_path;

namespace {

constexpr int kAdmin = 0, kExercise = 1, kLab = 3;

// Same hand-checked schedule as the verify tests.
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

}  // namespace

TEST(Rmse, KnownValues) {
  EXPECT_EQ(rmse({10, 20}, {10, 20}), 0.0);
  EXPECT_DOUBLE_EQ(rmse({0, 0}, {3, 4}), std::sqrt(12.5));
  EXPECT_DOUBLE_EQ(rmse({5}, {2}), 3.0);
}

TEST(Rmse, Errors) {
  EXPECT_THROW(rmse({1, 2}, {1}), LengthMismatch);
  EXPECT_THROW(rmse({}, {}), EmptyInput);
}

TEST(Rmse, Properties) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 200; ++round) {
    const int n = tap::test::uniform(rng, 1, 30);
    std::vector<std::int64_t> t(n), a(n);
    for (int i = 0; i < n; ++i) {
      t[i] = tap::test::uniform(rng, 0, 2000);
      a[i] = tap::test::uniform(rng, 0, 2000);
    }
    const double base = rmse(t, a);
    EXPECT_GE(base, 0.0);
    // Shifting both sides leaves the error alone.
    const std::int64_t k = tap::test::uniform(rng, -500, 500);
    auto ts = t, as = a;
    for (int i = 0; i < n; ++i) ts[i] += k, as[i] += k;
    EXPECT_NEAR(rmse(ts, as), base, 1e-9);
    // So does permuting the pairs together.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::int64_t> tp(n), ap(n);
    for (int i = 0; i < n; ++i) tp[i] = t[perm[i]], ap[i] = a[perm[i]];
    EXPECT_NEAR(rmse(tp, ap), base, 1e-9);
    // Symmetric in its arguments, and bounded by the largest gap.
    EXPECT_NEAR(rmse(a, t), base, 1e-9);
    std::int64_t worst = 0;
    for (int i = 0; i < n; ++i) worst = std::max<std::int64_t>(worst, std::llabs(a[i] - t[i]));
    EXPECT_LE(base, static_cast<double>(worst) + 1e-9);
  }
}

TEST(Report, SmallSchedule) {
  const Instance inst = load_instance(data_path("small.json"));
  const Report r = build_report(inst, clean(inst), "manual");
  EXPECT_EQ(r.label, "small");
  // Targets 10, 7, 6 against 8, 7, 6.
  ASSERT_EQ(r.scatter.size(), 3u);
  EXPECT_EQ(r.scatter[0].ta, "anna");
  EXPECT_EQ(r.scatter[0].target, 10);
  EXPECT_EQ(r.scatter[0].assigned, 8);
  EXPECT_DOUBLE_EQ(r.rmse, std::sqrt(4.0 / 3.0));
  EXPECT_EQ(r.course_histogram.at(1), (std::vector<std::string>{"anna", "ben"}));
  EXPECT_EQ(r.course_histogram.at(2), (std::vector<std::string>{"cleo"}));
  EXPECT_EQ(r.new_course_histogram.at(0), (std::vector<std::string>{"anna"}));
  EXPECT_EQ(r.new_course_histogram.at(1), (std::vector<std::string>{"ben", "cleo"}));
  EXPECT_EQ(r.objective, 37);
  EXPECT_TRUE(r.strict_ok);
  EXPECT_EQ(r.hard_violations, 0);
  EXPECT_FALSE(r.seconds);
}

TEST(Report, HistogramsCoverEveryTa) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    const Instance inst = Instance::from_spec(tap::test::random_spec(rng, tap::test::RandomSpecOptions{}));
    Assignment a = Assignment::empty_for(inst);
    for (int s = 0; s < inst.num_tas(); ++s)
      for (int c = 0; c < inst.num_courses(); ++c)
        if (tap::test::chance(rng, 0.4)) a.set_hours(s, c, kExercise, tap::test::uniform(rng, 1, 5));
    const Report r = build_report(inst, a, "random");
    std::size_t n = 0, m = 0;
    for (const auto& [k, tas] : r.course_histogram) n += tas.size();
    for (const auto& [k, tas] : r.new_course_histogram) m += tas.size();
    EXPECT_EQ(n, static_cast<std::size_t>(inst.num_tas()));
    EXPECT_EQ(m, static_cast<std::size_t>(inst.num_tas()));
    // An audit never throws, and its count matches the verdict.
    EXPECT_EQ(r.hard_violations,
              static_cast<int>(verify::check(inst, a, verify::Mode::audit).hard_violations.size()));
  }
}

TEST(Report, CompareTable) {
  const Instance inst = load_instance(data_path("small.json"));
  const Report manual = build_report(inst, clean(inst), "manual");
  const Report solved = build_report(inst, clean(inst), "tap", "optimal", 0.25);
  const Comparison cmp = compare({manual, solved});
  EXPECT_EQ(cmp.csv(),
            "source,status,rmse,time,objective,hard_violations\n"
            "manual,-,1.15,-,37,0\n"
            "tap,optimal,1.15,0.25,37,0\n");
  const std::string text = cmp.text();
  EXPECT_EQ(text,
            "small\n"
            "source  status   RMSE  time  objective  hard\n"
            "manual  -        1.15     -         37     0\n"
            "tap     optimal  1.15  0.25         37     0\n");

  Report other = solved;
  other.label = "other";
  EXPECT_THROW(compare({manual, other}), LabelMismatch);
  EXPECT_THROW(compare({}), EmptyInput);
}

TEST(Report, Json) {
  const Instance inst = load_instance(data_path("small.json"));
  const Json doc = to_json(build_report(inst, clean(inst), "manual"));
  EXPECT_TRUE(doc["seconds"].is_null());
  EXPECT_EQ(doc["scatter"].size(), 3u);
  EXPECT_EQ(doc["course_histogram"]["2"][0], "cleo");
  EXPECT_EQ(doc["objective"], 37);
  EXPECT_EQ(scatter_csv(build_report(inst, clean(inst), "manual")),
            "ta,target,assigned\nanna,10,8\nben,7,7\ncleo,6,6\n");
}
