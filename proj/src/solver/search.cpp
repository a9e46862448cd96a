#include <algorithm>
#include <chrono>
#include <functional>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "solver/guide.hpp"
#include "solver/hours.hpp"
#include "solver/problem.hpp"
#include "solver/state.hpp"
#include "tap/solver.hpp"

namespace tap::solver {

std::string_view to_string(Status status) {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::feasible_timeout: return "feasible_timeout";
    case Status::infeasible: return "infeasible";
    case Status::unknown: return "unknown";
  }
  return "unknown";
}

std::string solution_text(const SolveOutcome& outcome) {
  std::vector<std::string> comments{"status " + std::string(to_string(outcome.status))};
  if (outcome.best) comments.push_back("objective " + std::to_string(outcome.objective));
  comments.push_back("lower_bound " + std::to_string(outcome.lower_bound));
  if (!outcome.reason.empty()) comments.push_back("reason " + outcome.reason);
  if (!outcome.best) {
    std::string text;
    for (const auto& c : comments) text += "# " + c + "\n";
    return text;
  }
  return format_solution(*outcome.best, comments);
}

std::string format_progress(const Progress& p) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "t=%.3f inc=%s lb=%lld nodes=%llu", p.seconds,
                p.incumbent ? std::to_string(*p.incumbent).c_str() : "none",
                static_cast<long long>(p.lower_bound), static_cast<unsigned long long>(p.nodes));
  return buf;
}

namespace detail {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::int64_t kNoBound = std::numeric_limits<std::int64_t>::max();

/// Shared anytime state: incumbent, lower bound, limits and the progress log.
class Monitor {
 public:
  explicit Monitor(const SolveConfig& cfg) : cfg_(cfg), start_(Clock::now()) {}

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  /// Counts a node and reports whether the search must stop.
  bool tick() {
    const std::uint64_t n = ++nodes_;
    if (cfg_.node_limit && n > cfg_.node_limit) stopped_ = true;
    poll();
    return stopped_;
  }

  void poll() {
    if (cfg_.cancel && cfg_.cancel->load()) stopped_ = true;
    const double t = elapsed();
    if (t >= cfg_.time_limit) stopped_ = true;
    if (cfg_.on_progress && cfg_.log_interval > 0 && t - last_log_ >= cfg_.log_interval) {
      std::lock_guard lock(mu_);
      if (t - last_log_ >= cfg_.log_interval) {
        last_log_ = t;
        cfg_.on_progress(snapshot(t));
      }
    }
  }

  bool stopped() const { return stopped_; }
  void halt() { stopped_ = true; }
  std::uint64_t nodes() const { return nodes_; }

  std::int64_t best() const { return best_.load(); }

  /// Records a better incumbent; false if it does not improve.
  bool offer(std::int64_t objective) {
    std::lock_guard lock(mu_);
    if (objective >= best_.load()) return false;
    best_ = objective;
    has_incumbent_ = true;
    record();
    return true;
  }

  void raise_bound(std::int64_t lb) {
    std::lock_guard lock(mu_);
    if (has_incumbent_) lb = std::min(lb, best_.load());
    if (lb <= lower_bound_) return;
    lower_bound_ = lb;
    record();
  }

  std::int64_t lower_bound() const { return lower_bound_; }
  std::vector<Progress> trace() const { return trace_; }

 private:
  Progress snapshot(double t) const {
    Progress p;
    p.seconds = t;
    if (has_incumbent_) p.incumbent = best_.load();
    p.lower_bound = lower_bound_;
    p.nodes = nodes_;
    return p;
  }

  void record() {
    const Progress p = snapshot(elapsed());
    trace_.push_back(p);
    if (cfg_.on_progress) cfg_.on_progress(p);
  }

  const SolveConfig& cfg_;
  Clock::time_point start_;
  std::atomic<std::uint64_t> nodes_{0};
  std::atomic<bool> stopped_{false};
  std::atomic<std::int64_t> best_{kNoBound};
  bool has_incumbent_ = false;
  std::int64_t lower_bound_ = std::numeric_limits<std::int64_t>::min();
  double last_log_ = 0;
  std::vector<Progress> trace_;
  std::mutex mu_;
};

struct Schedule {
  std::vector<std::uint8_t> y;
  std::vector<int> x;
  std::int64_t cost = kNoBound;
};

struct CellRef {
  int s;
  int k;
};

/// Most constrained task first; inside a task, continuity and preference
/// first, then larger targets.
std::vector<CellRef> decision_order(const Problem& p, const SupportState& st,
                                    const std::vector<std::uint8_t>* allowed = nullptr) {
  std::vector<int> tasks(p.K);
  std::iota(tasks.begin(), tasks.end(), 0);
  std::vector<int> open(p.K, 0);
  for (int k = 0; k < p.K; ++k)
    for (int s = 0; s < p.S; ++s)
      if (!st.decided(s, k) && (!allowed || (*allowed)[p.sk(s, k)])) ++open[k];
  std::stable_sort(tasks.begin(), tasks.end(), [&](int a, int b) {
    const int sa = st.open_count(a) + st.in_count(a) - p.tasks[a].need;
    const int sb = st.open_count(b) + st.in_count(b) - p.tasks[b].need;
    if (sa != sb) return sa < sb;
    return p.tasks[a].tau > p.tasks[b].tau;
  });
  std::vector<CellRef> order;
  for (int k : tasks) {
    if (!open[k]) continue;
    std::vector<int> tas;
    for (int s = 0; s < p.S; ++s)
      if (!st.decided(s, k) && (!allowed || (*allowed)[p.sk(s, k)])) tas.push_back(s);
    const int c = p.tasks[k].c;
    std::stable_sort(tas.begin(), tas.end(), [&](int a, int b) {
      const int ka = p.kappa[p.sc(a, c)], kb = p.kappa[p.sc(b, c)];
      if (ka != kb) return ka > kb;
      const int pa = p.pref[p.sc(a, c)], pb = p.pref[p.sc(b, c)];
      if (pa != pb) return pa > pb;
      return p.target[a] > p.target[b];
    });
    for (int s : tas) order.push_back({s, k});
  }
  return order;
}

struct SearchOptions {
  HoursOptions hours;
  /// Value tried first per cell (s * K + k), e.g. the incumbent in LNS.
  const std::vector<std::uint8_t>* hint = nullptr;
  /// Nodes this run may use before giving up; 0 = no local cap.
  std::uint64_t node_cap = 0;
  /// Raise the monitor's lower bound while searching (single tree only).
  bool report = true;
};

struct SearchResult {
  Schedule best;
  bool complete = false;
  bool exact = true;
  std::uint64_t leaves = 0;
  std::uint64_t flows = 0;
  std::uint64_t propagations = 0;
  /// Smallest bound over the parts of the tree left unexplored.
  std::int64_t open_bound = kNoBound;
};

/// Depth-first branch and bound over the cells in `order`.
class BranchAndBound {
 public:
  BranchAndBound(const Problem& p, SupportState& st, std::vector<CellRef> order, const SearchOptions& opt,
                 Monitor& mon, std::int64_t cutoff)
      : p_(p), st_(st), order_(std::move(order)), opt_(opt), mon_(mon), cutoff_(cutoff) {}

  SearchResult run() {
    SearchResult r;
    const std::size_t n = order_.size();
    struct Frame {
      int tried = 0;
      bool assigned = false;
      std::uint8_t first = 1;
      std::int64_t parent_bound = 0;
    };
    std::vector<Frame> frames(n + 1);
    if (n == 0) {
      leaf(r);
      r.complete = true;
      r.open_bound = kNoBound;
      return r;
    }
    auto prepare = [&](std::size_t d) {
      Frame& f = frames[d];
      f.tried = 0;
      f.assigned = false;
      f.parent_bound = st_.bound();
      const CellRef cell = order_[d];
      if (opt_.hint) {
        f.first = (*opt_.hint)[p_.sk(cell.s, cell.k)];
      } else {
        f.first = st_.in_count(cell.k) < p_.tasks[cell.k].need ? 1 : 0;
      }
    };
    std::size_t d = 0;
    prepare(0);
    while (true) {
      Frame& f = frames[d];
      const CellRef cell = order_[d];
      if (f.assigned) {
        st_.undo(cell.s, cell.k);
        f.assigned = false;
      }
      if (f.tried == 2) {
        if (d == 0) {
          r.complete = true;
          break;
        }
        --d;
        continue;
      }
      if (mon_.tick()) break;
      if (opt_.node_cap && ++local_nodes_ > opt_.node_cap) break;
      const int v = f.tried == 0 ? f.first : 1 - f.first;
      ++f.tried;
      ++r.propagations;
      f.assigned = true;
      if (!st_.assign(cell.s, cell.k, v)) continue;
      if (st_.bound() >= limit()) continue;
      if (d + 1 == n) {
        leaf(r);
        continue;
      }
      ++d;
      prepare(d);
      if (opt_.report && (mon_.nodes() & 1023) == 0) mon_.raise_bound(open_bound(frames, d));
    }
    if (!r.complete) {
      r.open_bound = open_bound(frames, d);
      // Unwind so the state is reusable.
      for (std::size_t i = 0; i <= d && i < n; ++i) {
        const std::size_t j = d - i;
        if (frames[j].assigned) {
          st_.undo(order_[j].s, order_[j].k);
          frames[j].assigned = false;
        }
      }
    }
    return r;
  }

 private:
  std::int64_t limit() const {
    return std::min({cutoff_, best_, mon_.best()});
  }

  template <class Frames>
  std::int64_t open_bound(const Frames& frames, std::size_t d) const {
    std::int64_t lb = kNoBound;
    for (std::size_t i = 0; i <= d; ++i) {
      if (frames[i].tried < 2) lb = std::min(lb, frames[i].parent_bound);
    }
    // The node at depth d itself is still open as a whole.
    lb = std::min(lb, frames[d].parent_bound);
    return lb;
  }

  void leaf(SearchResult& r) {
    ++r.leaves;
    std::vector<std::uint8_t> y = st_.support();
    HoursResult hr = solve_hours(p_, y, opt_.hours);
    r.flows += hr.flows;
    if (!hr.exact) r.exact = false;
    if (!hr.feasible) return;
    const std::int64_t total = st_.support_cost() + hr.cost;
    if (total >= limit()) return;
    best_ = total;
    r.best.y = std::move(y);
    r.best.x = std::move(hr.x);
    r.best.cost = total;
    mon_.offer(total);
  }

  const Problem& p_;
  SupportState& st_;
  std::vector<CellRef> order_;
  SearchOptions opt_;
  Monitor& mon_;
  std::int64_t cutoff_;
  std::int64_t best_ = kNoBound;
  std::uint64_t local_nodes_ = 0;
};

Assignment to_assignment(const Problem& p, const Schedule& sched) {
  Assignment a(p.S, p.C);
  for (int s = 0; s < p.S; ++s) {
    for (int k = 0; k < p.K; ++k) {
      const int x = sched.x[p.sk(s, k)];
      if (x) a.set_hours(s, p.tasks[k].c, p.tasks[k].t, x);
    }
  }
  return a;
}

// ---- warm start ---------------------------------------------------------

/// Greedy support. Tasks are staffed most constrained first (fewest TAs that
/// can still join); TAs are ranked by how far their planned hours sit below
/// target, then by course reuse and continuity. Cells nobody picked stay open
/// until every task is staffed, so a TA is never shut out early; TAs still
/// short of their hard window are then topped up and the rest closed.
/// `guide` (from guide_hours, may be empty) pulls TAs toward the cells a
/// relaxed flow used; `boost` shifts TA priorities between repair rounds.
/// With `preset`, cells holding 0 or 1 are fixed first and only the cells
/// marked -1 are left to the greedy. `repair` carries what earlier rounds
/// learned from the hour flow.
struct Repair {
  std::vector<std::int64_t> lift;  // per TA: extra share to top up to
  std::vector<double> shun;        // per cell: score penalty
};

std::optional<Schedule> greedy(const Problem& p, const std::vector<std::int64_t>& guide,
                               const std::vector<double>& boost, const HoursOptions& hopt,
                               std::vector<int>& short_tas, const std::vector<std::int8_t>* preset = nullptr,
                               const Repair* repair = nullptr) {
  short_tas.clear();
  SupportState st(p);
  if (!st.consistent()) return std::nullopt;
  if (preset) {
    for (int s = 0; s < p.S; ++s)
      for (int k = 0; k < p.K; ++k) {
        const int v = (*preset)[p.sk(s, k)];
        if (v >= 0 && !st.decided(s, k) && !st.assign(s, k, v)) return std::nullopt;
      }
  }
  std::vector<std::uint8_t> guided_pair(static_cast<std::size_t>(p.S) * p.C, 0);
  for (int s = 0; s < p.S && !guide.empty(); ++s)
    for (int k = 0; k < p.K; ++k)
      if (guide[p.sk(s, k)] > 0) guided_pair[p.sc(s, p.tasks[k].c)] = 1;
  auto pull = [&](int s, int k) -> double {
    if (guide.empty()) return 0;
    if (guide[p.sk(s, k)] > 0) return 200.0 + static_cast<double>(guide[p.sk(s, k)]);
    return guided_pair[p.sc(s, p.tasks[k].c)] ? 100.0 : 0.0;
  };

  std::vector<std::vector<int>> members(p.K);
  std::vector<std::int64_t> hi_in(p.K, 0);
  std::vector<double> planned(p.S, 0.0);
  std::vector<std::int64_t> cap_in(p.S, 0);  // sum of cell_hi over chosen cells
  auto join = [&](int s, int k) {
    auto& m = members[k];
    const double tau = p.tasks[k].tau;
    for (int r : m) planned[r] += tau / static_cast<double>(m.size() + 1) - tau / static_cast<double>(m.size());
    m.push_back(s);
    planned[s] += tau / static_cast<double>(m.size());
    hi_in[k] += p.cell_hi[p.sk(s, k)];
    cap_in[s] += p.cell_hi[p.sk(s, k)];
  };
  for (int s = 0; s < p.S; ++s)
    for (int k = 0; k < p.K; ++k)
      if (st.value(s, k) == 1) join(s, k);

  auto can = [&](int s, int k) {
    if (st.decided(s, k)) return false;
    const bool ok = st.assign(s, k, 1);
    st.undo(s, k);
    return ok;
  };
  auto staffed = [&](int k) { return st.in_count(k) >= p.tasks[k].need && hi_in[k] >= p.tasks[k].tau; };

  std::vector<std::uint8_t> open(p.cell.size(), 0);
  std::vector<int> count(p.K, 0);
  for (int s = 0; s < p.S; ++s)
    for (int k = 0; k < p.K; ++k)
      if ((open[p.sk(s, k)] = can(s, k))) ++count[k];
  auto refresh = [&](int s, int k) {
    const bool now = can(s, k);
    std::uint8_t& o = open[p.sk(s, k)];
    if (now != static_cast<bool>(o)) count[k] += now ? 1 : -1;
    o = now;
  };

  auto score = [&](int s, int k) {
    const TaskInfo& task = p.tasks[k];
    const std::size_t pc = p.sc(s, task.c);
    double v = boost[s] + pull(s, k) + (static_cast<double>(p.target[s]) - planned[s]);
    if (repair) v -= repair->shun[p.sk(s, k)];
    if (st.teaches(s, task.c)) {
      v += 150;
    } else {
      v -= 40.0 * st.courses(s);
      if (!p.kappa[pc]) v -= 60;
    }
    if (p.course_pin[pc]) v += 1000;
    v += 20.0 * p.pref[pc];
    const double share = task.tau / static_cast<double>(st.in_count(k) + 1);
    if (planned[s] + share > static_cast<double>(p.hard_hi[s])) v -= 500;
    return v;
  };

  auto take = [&](int s, int k) {
    if (!st.assign(s, k, 1)) {
      st.undo(s, k);
      return false;
    }
    join(s, k);
    const int c = p.tasks[k].c;
    for (int k2 = 0; k2 < p.K; ++k2) refresh(s, k2);
    for (int k2 : p.course_tasks[c])
      for (int r = 0; r < p.S; ++r) refresh(r, k2);
    return true;
  };

  // Hours s could still hold in course c given what others already reserve.
  auto room = [&](int s, int c) {
    std::int64_t r = 0;
    for (int k : p.course_tasks[c]) {
      const std::size_t i = p.sk(s, k);
      if (st.value(s, k) == 1) r += p.cell_hi[i];
      else if (open[i]) r += std::min<std::int64_t>(p.cell_hi[i], std::max<std::int64_t>(0, p.tasks[k].tau - st.sum_lo(k)));
    }
    return r;
  };
  // Upper estimate of the hours s can reach if it also takes course `extra`
  // (-1 for none): its courses plus the roomiest ones its remaining course
  // and new-course allowances admit.
  std::vector<std::pair<std::int64_t, bool>> spare;
  auto reach = [&](int s, int extra) {
    std::int64_t total = 0;
    int slots = p.bounds.hard_courses_per_ta, fresh = p.bounds.hard_new_courses;
    spare.clear();
    for (int c = 0; c < p.C; ++c) {
      const bool fresh_pair = !p.kappa[p.sc(s, c)];
      if (st.teaches(s, c) || c == extra) {
        total += room(s, c);
        --slots;
        fresh -= fresh_pair;
      } else if (const std::int64_t r = room(s, c); r > 0) {
        spare.push_back({r, fresh_pair});
      }
    }
    if (slots < 0 || fresh < 0) return std::int64_t{-1};
    std::sort(spare.begin(), spare.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [r, is_new] : spare) {
      if (slots == 0) break;
      if (is_new && fresh == 0) continue;
      total += r;
      --slots;
      fresh -= is_new;
    }
    return total;
  };
  // Entering a course must not leave the TA unable to reach its window.
  auto admissible = [&](int s, int k) {
    const int c = p.tasks[k].c;
    if (st.teaches(s, c)) return true;
    const std::int64_t before = reach(s, -1);
    return before < p.hard_lo[s] || reach(s, c) >= p.hard_lo[s];
  };

  auto best_for = [&](int k) {
    int best = -1, fallback = -1;
    double best_v = 0, fallback_v = 0;
    for (int s = 0; s < p.S; ++s) {
      if (!open[p.sk(s, k)]) continue;
      const double v = score(s, k);
      if (fallback < 0 || v > fallback_v) fallback = s, fallback_v = v;
      if ((best < 0 || v > best_v) && admissible(s, k)) best = s, best_v = v;
    }
    return best >= 0 ? best : fallback;
  };

  // Staff every task.
  for (;;) {
    int pick = -1;
    for (int k = 0; k < p.K; ++k) {
      if (staffed(k)) continue;
      if (pick < 0 || count[k] < count[pick] ||
          (count[k] == count[pick] && p.tasks[k].tau > p.tasks[pick].tau))
        pick = k;
    }
    if (pick < 0) break;
    const int s = best_for(pick);
    if (s < 0 || !take(s, pick)) return std::nullopt;
  }

  // Planned course pins without a chosen cell.
  for (int s = 0; s < p.S; ++s)
    for (int c = 0; c < p.C; ++c) {
      if (!p.course_pin[p.sc(s, c)] || st.teaches(s, c)) continue;
      int k_best = -1;
      for (int k : p.course_tasks[c])
        if (open[p.sk(s, k)] && (k_best < 0 || p.tasks[k].tau > p.tasks[k_best].tau)) k_best = k;
      if (k_best >= 0) take(s, k_best);
    }

  // Top up TAs whose chosen cells cannot reach their hard window, or whose
  // share estimate falls short of it.
  for (int s = 0; s < p.S; ++s) {
    const std::int64_t want = p.hard_lo[s] + (repair ? repair->lift[s] : 0);
    while (cap_in[s] < p.hard_lo[s] || planned[s] < static_cast<double>(want)) {
      int k_best = -1;
      double v_best = 0;
      for (int k = 0; k < p.K; ++k) {
        if (!open[p.sk(s, k)] || p.tasks[k].admin) continue;
        double v = pull(s, k) + p.tasks[k].tau / static_cast<double>(st.in_count(k) + 1);
        if (st.teaches(s, p.tasks[k].c)) v += 1000;
        if (k_best < 0 || v > v_best) k_best = k, v_best = v;
      }
      if (k_best < 0 || !take(s, k_best)) break;
    }
  }

  // Close everything still open. A TA that cannot be closed off is short of
  // its window; report it so the next round ranks it higher.
  bool stuck = false;
  for (int s = 0; s < p.S; ++s) {
    bool is_short = false;
    for (int k = 0; k < p.K; ++k) {
      if (st.decided(s, k)) continue;
      if (st.assign(s, k, 0)) continue;
      st.undo(s, k);
      if (!st.assign(s, k, 1)) {
        st.undo(s, k);
        st.assign(s, k, 0);  // keep going to find every short TA
        is_short = stuck = true;
      }
    }
    if (is_short || st.h_max(s) < p.hard_lo[s]) short_tas.push_back(s);
  }
  if (stuck || !st.consistent()) return std::nullopt;

  std::vector<std::uint8_t> y = st.support();
  HoursResult hr = solve_hours(p, y, hopt);
  if (!hr.feasible) {
    Schedule failed;
    failed.y = std::move(y);
    return failed;  // cost stays kNoBound: support found, hours not
  }
  Schedule out;
  out.y = std::move(y);
  out.x = std::move(hr.x);
  out.cost = st.support_cost() + hr.cost;
  return out;
}

/// Greedy rounds with priority repair, then the hour distribution of the
/// first hard-feasible support. Rounds route hours with a single flow; only
/// the winner gets the level search allowed by `hopt`.
std::optional<Schedule> warm_schedule(const Problem& p, const HoursOptions& hopt, const std::function<bool()>& stop,
                                      int rounds = 24) {
  if (!p.root_conflict.empty()) return std::nullopt;
  std::vector<double> boost(p.S, 0.0);
  Repair repair{std::vector<std::int64_t>(p.S, 0), std::vector<double>(p.cell.size(), 0.0)};
  const std::vector<std::int64_t> guide = guide_hours(p);
  HoursOptions quick = hopt;
  quick.level_cap = 1;
  std::vector<int> short_tas;
  for (int round = 0; round < rounds && !(round > 0 && stop()); ++round) {
    auto g = greedy(p, guide, boost, quick, short_tas, nullptr, &repair);
    if (!g) {
      if (short_tas.empty()) return std::nullopt;
      for (int s : short_tas) boost[s] += 150;
      continue;
    }
    if (g->cost != kNoBound) {
      if (hopt.level_cap == 1) return g;
      HoursResult hr = solve_hours(p, g->y, hopt);
      if (hr.feasible) {
        SupportState st(p);
        for (int s = 0; s < p.S; ++s)
          for (int k = 0; k < p.K; ++k)
            if (!st.decided(s, k)) st.assign(s, k, g->y[p.sk(s, k)]);
        g->x = std::move(hr.x);
        g->cost = st.support_cost() + hr.cost;
      }
      return g;
    }
    // Shift priority toward TAs left short and away from overloaded ones.
    std::vector<std::int64_t> h = closest_hours(p, g->y);
    if (h.empty()) return std::nullopt;
    bool moved = false;
    for (int s = 0; s < p.S; ++s) {
      if (h[s] < p.hard_lo[s]) {
        const std::int64_t gap = p.hard_lo[s] - h[s];
        boost[s] += 150;
        repair.lift[s] += gap;
        // Partners near their own floor crowd s out of shared tasks. Ask
        // them to pick up work elsewhere; if that already failed, steer s
        // away from the task instead.
        for (int k = 0; k < p.K; ++k) {
          if (!g->y[p.sk(s, k)]) continue;
          for (int r = 0; r < p.S; ++r) {
            if (r == s || !g->y[p.sk(r, k)] || h[r] >= p.hard_lo[r] + gap) continue;
            if (repair.lift[r] >= gap) repair.shun[p.sk(s, k)] += 400;
            repair.lift[r] = std::max(repair.lift[r], gap);
          }
        }
        moved = true;
      } else if (h[s] > p.hard_hi[s]) {
        boost[s] -= 150;
        moved = true;
      }
    }
    if (!moved) return std::nullopt;
  }
  return std::nullopt;
}

// ---- large-neighborhood search -------------------------------------------

/// Frees a few courses (with the TAs currently on them plus a few random TAs)
/// and rebuilds them; everything else stays at the incumbent. Seven rounds in
/// eight rebuild with the greedy under noisy priorities, the eighth with a
/// node-capped exact search. Each round counts as at least one node, so a
/// node limit bounds the search deterministically. Stops on the monitor or
/// after `patience` idle rounds.
void lns(const Problem& p, Schedule& incumbent, const SolveConfig& cfg, Monitor& mon, SearchResult& stats,
         const HoursOptions& hopt) {
  if (p.C == 0 || p.S == 0) return;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uint8_t> allowed(p.cell.size());
  std::vector<std::int8_t> preset(p.cell.size());
  const std::vector<std::int64_t> guide = guide_hours(p);
  std::vector<double> noise(p.S);
  std::vector<int> short_tas;
  const int patience = 400;
  int idle = 0;
  for (std::uint64_t round = 0; !mon.stopped() && idle < patience; ++round) {
    std::fill(allowed.begin(), allowed.end(), 0);
    const int courses = std::min(p.C, 2 + static_cast<int>(rng() % 3));
    std::vector<int> picked;
    while (static_cast<int>(picked.size()) < courses) {
      const int c = static_cast<int>(rng() % p.C);
      if (std::find(picked.begin(), picked.end(), c) == picked.end()) picked.push_back(c);
    }
    std::vector<std::uint8_t> ta_in(p.S, 0);
    for (int c : picked)
      for (int k : p.course_tasks[c])
        for (int s = 0; s < p.S; ++s)
          if (incumbent.y[p.sk(s, k)]) ta_in[s] = 1;
    const int extra = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < extra; ++i) ta_in[rng() % p.S] = 1;

    SearchResult r;
    if (round % 8 != 0) {
      // Greedy repair: every cell of the picked courses is reopened, as are
      // the other cells of the TAs on them; priorities get random noise.
      for (std::size_t i = 0; i < preset.size(); ++i) preset[i] = static_cast<std::int8_t>(incumbent.y[i]);
      for (int c : picked)
        for (int k : p.course_tasks[c])
          for (int s = 0; s < p.S; ++s) preset[p.sk(s, k)] = -1;
      for (int s = 0; s < p.S; ++s) {
        noise[s] = std::normal_distribution<double>(0.0, 60.0)(rng);
        if (!ta_in[s]) continue;
        for (int k = 0; k < p.K; ++k)
          if (!incumbent.y[p.sk(s, k)]) preset[p.sk(s, k)] = -1;
      }
      mon.tick();
      if (auto g = greedy(p, rng() % 2 ? guide : std::vector<std::int64_t>{}, noise, hopt, short_tas, &preset)) {
        r.best = std::move(*g);
      }
    } else {
      for (int c : picked)
        for (int k : p.course_tasks[c])
          for (int s = 0; s < p.S; ++s)
            if (ta_in[s] && p.cell[p.sk(s, k)] == Cell::free) allowed[p.sk(s, k)] = 1;

      SupportState st(p);
      bool ok = true;
      for (int s = 0; s < p.S && ok; ++s)
        for (int k = 0; k < p.K && ok; ++k)
          if (!st.decided(s, k) && !allowed[p.sk(s, k)]) ok = st.assign(s, k, incumbent.y[p.sk(s, k)]);
      if (!ok) return;

      SearchOptions opt;
      opt.hours = hopt;
      opt.hint = &incumbent.y;
      opt.node_cap = 300;
      opt.report = false;
      BranchAndBound bb(p, st, decision_order(p, st, &allowed), opt, mon, incumbent.cost);
      r = bb.run();
    }
    stats.leaves += r.leaves;
    stats.flows += r.flows;
    stats.propagations += r.propagations;
    if (r.best.cost < incumbent.cost) {
      incumbent = std::move(r.best);
      mon.offer(incumbent.cost);
      idle = 0;
    } else {
      ++idle;
    }
  }
}

// ---- exact search --------------------------------------------------------

/// Splits the tree on the first `depth` decisions and lets workers pull
/// prefixes. All workers prune against the monitor's incumbent.
SearchResult parallel_search(const Problem& p, const std::vector<CellRef>& order, const HoursOptions& hopt,
                             Monitor& mon, int threads, std::int64_t root_bound) {
  int depth = 0;
  while ((1 << depth) < 8 * threads && depth < static_cast<int>(order.size()) && depth < 16) ++depth;
  const int prefixes = 1 << depth;
  std::atomic<int> next{0};
  std::mutex mu;
  SearchResult total;
  total.complete = true;
  std::vector<std::int64_t> open(prefixes, kNoBound);
  std::vector<std::uint8_t> started(prefixes, 0);

  auto worker = [&] {
    while (!mon.stopped()) {
      const int id = next++;
      if (id >= prefixes) return;
      SupportState st(p);
      bool ok = true;
      std::vector<CellRef> rest(order.begin() + depth, order.end());
      for (int i = 0; i < depth && ok; ++i) ok = st.assign(order[i].s, order[i].k, (id >> (depth - 1 - i)) & 1);
      SearchResult r;
      if (ok && st.bound() < mon.best()) {
        SearchOptions opt;
        opt.hours = hopt;
        opt.report = false;
        BranchAndBound bb(p, st, std::move(rest), opt, mon, kNoBound);
        r = bb.run();
      } else {
        r.complete = true;
      }
      std::lock_guard lock(mu);
      started[id] = 1;
      open[id] = r.complete ? kNoBound : r.open_bound;
      total.complete = total.complete && r.complete;
      total.exact = total.exact && r.exact;
      total.leaves += r.leaves;
      total.flows += r.flows;
      total.propagations += r.propagations;
      if (r.best.cost < total.best.cost) total.best = std::move(r.best);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (int id = 0; id < prefixes; ++id) {
    if (!started[id]) {
      total.complete = false;
      open[id] = root_bound;
    }
    total.open_bound = std::min(total.open_bound, open[id]);
  }
  return total;
}

std::size_t free_cells(const Problem& p) {
  return static_cast<std::size_t>(std::count(p.cell.begin(), p.cell.end(), Cell::free));
}

}  // namespace
}  // namespace detail

using namespace detail;

SolveOutcome solve(const model::ModelIR& ir, const SolveConfig& cfg) {
  if (!ir.source) throw Error("solve needs a model built from an instance");
  const Problem p = make_problem(*ir.source, ir.mode);
  Monitor mon(cfg);
  SolveOutcome out;
  auto finish = [&] {
    out.stats.nodes = mon.nodes();
    out.stats.wall_seconds = mon.elapsed();
    out.trace = mon.trace();
    return out;
  };
  if (!p.root_conflict.empty()) {
    out.status = Status::infeasible;
    out.reason = p.root_conflict;
    return finish();
  }
  SupportState root(p);
  if (!root.consistent()) {
    out.status = Status::infeasible;
    out.reason = root.conflict();
    return finish();
  }
  const std::int64_t root_bound = root.bound();
  mon.raise_bound(root_bound);

  const bool exact_mode = cfg.optimality_required || free_cells(p) <= 60;
  HoursOptions hopt;
  hopt.tie_break = cfg.tie_break;
  hopt.level_cap = exact_mode ? 0 : 12;

  Schedule best;
  SearchResult r;
  bool exhaustive = false;
  if (exact_mode) {
    const std::vector<CellRef> order = decision_order(p, root);
    if (cfg.thread_budget > 1 && order.size() > 8) {
      r = parallel_search(p, order, hopt, mon, cfg.thread_budget, root_bound);
    } else {
      SearchOptions opt;
      opt.hours = hopt;
      BranchAndBound bb(p, root, order, opt, mon, kNoBound);
      r = bb.run();
    }
    best = std::move(r.best);
    exhaustive = r.complete && r.exact;
    if (r.complete) mon.raise_bound(best.cost);
    else mon.raise_bound(r.open_bound);
  } else {
    auto stop = [&] {
      mon.poll();
      return mon.stopped();
    };
    if (auto w = warm_schedule(p, hopt, stop); w && w->cost != kNoBound) {
      best = std::move(*w);
      mon.offer(best.cost);
      lns(p, best, cfg, mon, r, hopt);
    } else {
      // No greedy start; plain depth-first search until the budget runs out.
      SearchOptions opt;
      opt.hours = hopt;
      BranchAndBound bb(p, root, decision_order(p, root), opt, mon, kNoBound);
      r = bb.run();
      best = std::move(r.best);
      exhaustive = r.complete && r.exact;
      if (r.complete) mon.raise_bound(best.cost);
      else mon.raise_bound(r.open_bound);
    }
  }
  out.stats.leaves = r.leaves;
  out.stats.flows = r.flows;
  out.stats.propagations = r.propagations;

  if (best.cost == kNoBound) {
    if (exhaustive) {
      out.status = Status::infeasible;
      out.reason = "search exhausted";
    } else {
      out.status = Status::unknown;
    }
    out.lower_bound = mon.lower_bound();
    return finish();
  }
  out.best = to_assignment(p, best);
  out.objective = best.cost;
  out.lower_bound = std::min(mon.lower_bound(), best.cost);
  out.status = exhaustive || out.lower_bound == best.cost ? Status::optimal : Status::feasible_timeout;
  if (out.status == Status::optimal) out.lower_bound = best.cost;
  return finish();
}

std::optional<Assignment> warm_start(const model::ModelIR& ir, const SolveConfig& cfg) {
  if (!ir.source) throw Error("warm_start needs a model built from an instance");
  const Problem p = make_problem(*ir.source, ir.mode);
  HoursOptions hopt;
  hopt.tie_break = cfg.tie_break;
  hopt.level_cap = 12;
  Monitor mon(cfg);
  auto w = warm_schedule(p, hopt, [&] {
    mon.poll();
    return mon.stopped();
  });
  if (!w || w->cost == kNoBound) return std::nullopt;
  return to_assignment(p, *w);
}

}  // namespace tap::solver
