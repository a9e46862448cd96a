#include "tap/generate.hpp"

#include <algorithm>
#include <cstdio>
#include <queue>
#include <random>

namespace tap::gen {

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string padded(const char* prefix, int i, int n) {
  const int width = static_cast<int>(std::to_string(n).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i + 1);
  return buf;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

// One staffed cell of the plan.
struct Slot {
  int s, c, t;
  double weight = 0;
  std::int64_t hours = 0;
};

void check(const GenerateSpec& g) {
  if (g.n_tas <= 0) throw SpecError("n_tas must be positive");
  if (g.n_courses <= 0) throw SpecError("n_courses must be positive");
  if (g.max_tasks_per_course <= 0 || g.max_tasks_per_course > kTaskKinds)
    throw SpecError("max_tasks_per_course must be in [1," + std::to_string(kTaskKinds) + "]");
  const Fraction r = g.demand_to_capacity_ratio;
  if (r.den <= 0 || r.num <= 0 || 5 * r.num > 6 * r.den) throw SpecError("demand_to_capacity_ratio must be in (0, 1.2]");
}

}  // namespace

Generated generate_with_witness(const GenerateSpec& g) {
  check(g);
  std::mt19937_64 rng(g.seed);
  const int S = g.n_tas, C = g.n_courses;

  InstanceSpec spec;
  char label[96];
  std::snprintf(label, sizeof label, "gen-%dx%dx%d-r%lld_%lld-s%llu", S, C, g.max_tasks_per_course,
                static_cast<long long>(g.demand_to_capacity_ratio.num),
                static_cast<long long>(g.demand_to_capacity_ratio.den), static_cast<unsigned long long>(g.seed));
  spec.label = label;
  try {
    spec.bounds = BoundConfig::for_year(g.bound_year);
  } catch (const ValidationError&) {
    throw SpecError("no bound preset for year " + std::to_string(g.bound_year));
  }
  BoundConfig& b = spec.bounds;
  const int eps = b.min_task_hours;

  // TAs.
  std::vector<int> target(S);
  for (int s = 0; s < S; ++s) {
    TeachingAssistant ta;
    ta.id = padded("ta", s, S);
    ta.year = uniform(rng, 1, 5);
    ta.employment_fraction = Fraction::of(uniform(rng, 1, 10), 10);
    ta.carryover_hours = uniform(rng, -40, 40);
    target[s] = compute_target(ta.employment_fraction, ta.carryover_hours, b.annual_full_load);
    spec.tas.push_back(ta);
  }

  // Who teaches what. Every course gets an owner (its administrator), and
  // every TA joins at least one course when the task limit allows helpers.
  const bool helpers = g.max_tasks_per_course > 1;
  b.hard_courses_per_ta = std::max(b.hard_courses_per_ta, (C + S - 1) / S);
  if (helpers) b.hard_tas_per_course = std::max(b.hard_tas_per_course, (S + C - 1) / C + 1);
  b.soft_courses_per_ta = std::min(b.soft_courses_per_ta, b.hard_courses_per_ta);

  std::vector<int> owner(C);
  std::vector<std::vector<int>> members(C), courses_of(S);
  std::vector<int> perm(S);
  for (int s = 0; s < S; ++s) perm[s] = s;
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int c = 0; c < C; ++c) {
    owner[c] = perm[c % S];
    members[c].push_back(owner[c]);
    courses_of[owner[c]].push_back(c);
  }
  auto join = [&](int s) {
    std::vector<int> open;
    for (int c = 0; c < C; ++c) {
      if (static_cast<int>(members[c].size()) >= b.hard_tas_per_course) continue;
      if (std::find(courses_of[s].begin(), courses_of[s].end(), c) != courses_of[s].end()) continue;
      open.push_back(c);
    }
    if (open.empty()) return;
    const int c = open[uniform(rng, 0, static_cast<int>(open.size()) - 1)];
    members[c].push_back(s);
    courses_of[s].push_back(c);
  };
  if (helpers) {
    for (int s : perm)
      if (courses_of[s].empty()) join(s);
    for (int s : perm)
      if (static_cast<int>(courses_of[s].size()) < b.hard_courses_per_ta && chance(rng, 0.3)) join(s);
  }

  // Tasks and the cells that staff them.
  std::vector<Slot> slots;
  std::vector<std::vector<int>> kinds(C);
  for (int c = 0; c < C; ++c) {
    const int m = static_cast<int>(members[c].size());
    int k = uniform(rng, 1, g.max_tasks_per_course);
    if (m > 1) k = std::max(k, 2);
    std::vector<int> others;
    for (int t = 1; t < kTaskKinds; ++t) others.push_back(t);
    std::shuffle(others.begin(), others.end(), rng);
    kinds[c] = {0};
    kinds[c].insert(kinds[c].end(), others.begin(), others.begin() + (k - 1));
    std::sort(kinds[c].begin() + 1, kinds[c].end());

    std::vector<std::vector<int>> staff(kTaskKinds);
    staff[0].push_back(owner[c]);
    // Cover every non-admin task, helpers first, then give each helper work.
    std::vector<int> order(members[c].begin() + 1, members[c].end());
    std::shuffle(order.begin(), order.end(), rng);
    order.push_back(owner[c]);
    for (std::size_t i = 1; i < kinds[c].size(); ++i) staff[kinds[c][i]].push_back(order[(i - 1) % order.size()]);
    auto has_task = [&](int s) {
      for (std::size_t i = 1; i < kinds[c].size(); ++i) {
        const auto& v = staff[kinds[c][i]];
        if (std::find(v.begin(), v.end(), s) != v.end()) return true;
      }
      return false;
    };
    for (std::size_t i = 1; i < members[c].size(); ++i) {
      const int s = members[c][i];
      if (!has_task(s)) staff[kinds[c][uniform(rng, 1, k - 1)]].push_back(s);
    }
    if (k > 1) {
      for (int s : members[c]) {
        if (!chance(rng, 0.3)) continue;
        auto& v = staff[kinds[c][uniform(rng, 1, k - 1)]];
        if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
      }
    }
    for (int t : kinds[c]) {
      std::sort(staff[t].begin(), staff[t].end());
      for (int s : staff[t]) slots.push_back({s, c, t, static_cast<double>(uniform(rng, 1, 4))});
    }
  }
  // Drop kinds nobody staffs (possible only for a one-member course).
  for (int c = 0; c < C; ++c) {
    std::erase_if(kinds[c], [&](int t) {
      return std::none_of(slots.begin(), slots.end(), [&](const Slot& x) { return x.c == c && x.t == t; });
    });
  }

  // Previous year: most current pairs were taught before, at most the hard
  // limit of them are new, and some TAs taught a course they have left.
  std::vector<std::vector<char>> kappa(S, std::vector<char>(C, 0)), pref_set(S, std::vector<char>(C, 0));
  for (int s = 0; s < S; ++s) {
    std::vector<int> mine = courses_of[s];
    std::shuffle(mine.begin(), mine.end(), rng);
    int fresh = 0;
    for (int c : mine) {
      if (fresh < b.hard_new_courses && chance(rng, 0.35)) {
        ++fresh;
        continue;
      }
      kappa[s][c] = 1;
    }
    if (chance(rng, 0.3)) {
      const int c = uniform(rng, 0, C - 1);
      if (std::find(mine.begin(), mine.end(), c) == mine.end()) kappa[s][c] = 1;
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int c = 0; c < C; ++c) {
      const bool planned = std::find(courses_of[s].begin(), courses_of[s].end(), c) != courses_of[s].end();
      PairData p{spec.tas[s].id, padded("c", c, C), 0, false, kappa[s][c] != 0};
      const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
      if (roll < 0.12) p.preference = 1;
      else if (roll < 0.17) p.preference = -1;
      if (!planned && chance(rng, 0.03)) p.forbidden = true;
      if (p.preference != 0 || p.forbidden || p.taught_last_year) spec.pairs.push_back(p);
    }
  }

  // Everything below depends on the ratio; nothing below draws from rng.
  std::int64_t sum_target = 0;
  for (int v : target) sum_target += v;
  const Fraction r = g.demand_to_capacity_ratio;
  const std::int64_t demand = floor_div(2 * r.num * sum_target + r.den, 2 * r.den);

  // Each TA's weight is spread over its cells by the drawn shares.
  std::vector<double> share_sum(S, 0);
  for (const auto& x : slots) share_sum[x.s] += x.weight;
  for (auto& x : slots) x.weight = std::max(target[x.s], eps) * x.weight / share_sum[x.s];

  // Every cell starts at eps; the rest goes out one hour at a time to the
  // largest weight / (extra + 1). Adding hours never takes any back, which
  // keeps totals monotone in the demand.
  for (auto& x : slots) x.hours = eps;
  std::int64_t extra = demand - static_cast<std::int64_t>(slots.size()) * eps;
  using Entry = std::pair<double, int>;
  auto cmp = [](const Entry& a, const Entry& b2) {
    return a.first != b2.first ? a.first < b2.first : a.second > b2.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  std::vector<std::int64_t> given(slots.size(), 0);
  for (std::size_t i = 0; i < slots.size(); ++i) heap.push({slots[i].weight, static_cast<int>(i)});
  for (; extra > 0; --extra) {
    const int i = heap.top().second;
    heap.pop();
    ++given[i];
    slots[i].hours += 1;
    heap.push({slots[i].weight / static_cast<double>(given[i] + 1), i});
  }

  Assignment witness(S, C);
  std::vector<std::vector<int>> tau(C, std::vector<int>(kTaskKinds, 0)), staffed(C, std::vector<int>(kTaskKinds, 0));
  for (const auto& x : slots) {
    witness.set_hours(x.s, x.c, x.t, static_cast<int>(x.hours));
    tau[x.c][x.t] += static_cast<int>(x.hours);
    ++staffed[x.c][x.t];
  }
  // Required staff is drawn from a fixed stream so it too ignores the ratio.
  std::mt19937_64 staff_rng(g.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int c = 0; c < C; ++c) {
    CourseSpec course;
    course.id = padded("c", c, C);
    for (int t : kinds[c]) {
      const int rho = t == 0 ? 1 : uniform(staff_rng, 1, staffed[c][t]);
      course.tasks.push_back({static_cast<TaskKind>(t), tau[c][t], rho});
    }
    spec.courses.push_back(std::move(course));
  }
  return {Instance::from_spec(std::move(spec)), std::move(witness)};
}

Instance generate(const GenerateSpec& spec) { return generate_with_witness(spec).instance; }

}  // namespace tap::gen
