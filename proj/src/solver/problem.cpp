#include "solver/problem.hpp"

#include <algorithm>

namespace tap::solver::detail {

namespace {

std::string sc_tag(const char* family, int s, int c) {
  return std::string(family) + "[s" + std::to_string(s) + ",c" + std::to_string(c) + "]";
}

}  // namespace

std::int64_t Problem::hours_cost(int s, std::int64_t h) const {
  const std::int64_t dev = h > target[s] ? h - target[s] : target[s] - h;
  const bool senior = instance->year(s) >= 5;
  std::int64_t cost = 0;
  if (mode == PenaltyMode::indicator) {
    if (senior && dev != 0) cost += weights.target_year5;
    if (dev > bounds.soft_dev) cost += weights.soft_dev;
  } else {
    if (senior) cost += weights.target_year5 * dev;
    cost += weights.soft_dev * std::max<std::int64_t>(0, dev - bounds.soft_dev);
  }
  return cost;
}

std::int64_t Problem::min_hours_cost(int s, std::int64_t lo, std::int64_t hi) const {
  lo = std::max(lo, hard_lo[s]);
  hi = std::min(hi, hard_hi[s]);
  if (lo > hi) return -1;
  if (mode == PenaltyMode::indicator) {
    for (const auto& level : levels[s]) {
      if (level.lo <= hi && lo <= level.hi) return level.cost;
    }
    return -1;
  }
  return hours_cost(s, std::clamp(target[s], lo, hi));
}

Problem make_problem(const Instance& inst, PenaltyMode mode) {
  Problem p;
  p.instance = &inst;
  p.S = inst.num_tas();
  p.C = inst.num_courses();
  p.bounds = inst.bounds();
  p.weights = inst.weights();
  p.mode = mode;
  const BoundConfig& b = p.bounds;

  p.course_tasks.resize(p.C);
  p.task_of.assign(static_cast<std::size_t>(p.C) * kTaskKinds, -1);
  for (int c = 0; c < p.C; ++c) {
    for (int t = 0; t < kTaskKinds; ++t) {
      const int tau = inst.task_hours(c, t);
      if (tau == 0) continue;
      TaskInfo task;
      task.c = c;
      task.t = t;
      task.tau = tau;
      task.rho = inst.required_tas(c, t);
      task.admin = t == static_cast<int>(TaskKind::admin);
      task.need = std::max(task.rho, 1);
      p.task_of[static_cast<std::size_t>(c) * kTaskKinds + t] = static_cast<int>(p.tasks.size());
      p.course_tasks[c].push_back(static_cast<int>(p.tasks.size()));
      p.tasks.push_back(task);
    }
  }
  p.K = static_cast<int>(p.tasks.size());

  auto conflict = [&](std::string why) {
    if (p.root_conflict.empty()) p.root_conflict = std::move(why);
  };

  for (int s = 0; s < p.S; ++s) {
    const std::int64_t theta = inst.target(s);
    p.target.push_back(theta);
    p.hard_lo.push_back(std::max<std::int64_t>(0, theta - b.hard_dev));
    p.hard_hi.push_back(theta + b.hard_dev);
    if (p.hard_hi.back() < p.hard_lo.back()) conflict("Eq9[s" + std::to_string(s) + "]");

    // Nested windows with the penalty charged inside each.
    const bool senior = inst.year(s) >= 5;
    const std::int64_t w14 = senior ? p.weights.target_year5 : 0;
    std::vector<Level> raw;
    if (senior) raw.push_back({theta, theta, 0});
    raw.push_back({theta - b.soft_dev, theta + b.soft_dev, w14});
    raw.push_back({p.hard_lo[s], p.hard_hi[s], w14 + p.weights.soft_dev});
    std::vector<Level> levels;
    for (auto level : raw) {
      level.lo = std::max(level.lo, p.hard_lo[s]);
      level.hi = std::min(level.hi, p.hard_hi[s]);
      if (level.lo > level.hi) continue;
      // A looser window at no extra cost makes the tighter one pointless.
      while (!levels.empty() && levels.back().cost >= level.cost) levels.pop_back();
      if (!levels.empty() && levels.back().lo == level.lo && levels.back().hi == level.hi) continue;
      levels.push_back(level);
    }
    p.levels.push_back(std::move(levels));
  }

  p.cell.assign(static_cast<std::size_t>(p.S) * p.K, Cell::free);
  p.cell_lo.assign(p.cell.size(), 0);
  p.cell_hi.assign(p.cell.size(), 0);
  p.kappa.assign(static_cast<std::size_t>(p.S) * p.C, 0);
  p.pref.assign(p.kappa.size(), 0);
  p.course_pin.assign(p.kappa.size(), 0);
  for (int s = 0; s < p.S; ++s) {
    for (int c = 0; c < p.C; ++c) {
      p.kappa[p.sc(s, c)] = inst.taught_last_year(s, c) ? 1 : 0;
      p.pref[p.sc(s, c)] = static_cast<std::int8_t>(inst.preference(s, c));
      p.course_pin[p.sc(s, c)] = inst.pinned_course(s, c) ? 1 : 0;
      if (inst.forbidden(s, c) && inst.pinned_course(s, c)) conflict(sc_tag("Eq1", s, c));
    }
    for (int k = 0; k < p.K; ++k) {
      const TaskInfo& task = p.tasks[k];
      const std::size_t i = p.sk(s, k);
      const int lo = std::max(1, std::min(task.tau, b.min_task_hours));
      p.cell_lo[i] = lo;
      p.cell_hi[i] = task.tau;
      const auto pin = inst.pinned_hours(s, task.c, task.t);
      if (inst.forbidden(s, task.c)) {
        p.cell[i] = Cell::blocked;
        if (pin && *pin > 0) conflict(sc_tag("Eq1", s, task.c));
      } else if (pin) {
        if (*pin == 0) {
          p.cell[i] = Cell::blocked;
        } else {
          p.cell[i] = Cell::forced;
          p.cell_lo[i] = p.cell_hi[i] = *pin;
          if (*pin < lo) {
            conflict("Eq7[s" + std::to_string(s) + ",c" + std::to_string(task.c) + ",t" +
                     std::to_string(task.t) + "]");
          }
        }
      }
    }
  }

  for (int k = 0; k < p.K; ++k) {
    const TaskInfo& task = p.tasks[k];
    int forced = 0;
    std::int64_t pinned = 0;
    int open = 0;
    for (int s = 0; s < p.S; ++s) {
      const std::size_t i = p.sk(s, k);
      if (p.cell[i] == Cell::forced) {
        ++forced;
        pinned += p.cell_lo[i];
      }
      if (p.cell[i] != Cell::blocked) ++open;
    }
    const std::string where = "[c" + std::to_string(task.c) + ",t" + std::to_string(task.t) + "]";
    if (task.admin && (forced > 1 || task.rho > 1)) conflict("Eq13[c" + std::to_string(task.c) + "]");
    if (pinned > task.tau) conflict("Eq6" + where);
    if (open < task.need) conflict((open == 0 ? "Eq6" : "Eq8") + where);
  }
  for (int s = 0; s < p.S; ++s) {
    for (int c = 0; c < p.C; ++c) {
      if (!p.course_pin[p.sc(s, c)]) continue;
      bool any = false;
      for (int k : p.course_tasks[c]) any = any || p.cell[p.sk(s, k)] != Cell::blocked;
      if (!any) conflict(sc_tag("pin", s, c));
    }
  }
  return p;
}

}  // namespace tap::solver::detail
