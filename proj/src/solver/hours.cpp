#include "solver/hours.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace tap::solver::detail {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

/// Lexicographic cost: window distance, then penalty, then squared deviation.
struct Cost {
  std::int64_t hard = 0;
  std::int64_t soft = 0;
  std::int64_t sq = 0;

  Cost operator+(const Cost& o) const { return {hard + o.hard, soft + o.soft, sq + o.sq}; }
  Cost operator-(const Cost& o) const { return {hard - o.hard, soft - o.soft, sq - o.sq}; }
  bool operator<(const Cost& o) const {
    if (hard != o.hard) return hard < o.hard;
    if (soft != o.soft) return soft < o.soft;
    return sq < o.sq;
  }
  bool operator==(const Cost&) const = default;
};

struct Arc {
  int to;
  int rev;
  std::int64_t cap;
};

/// Successive shortest paths on source -> task -> TA -> sink. Task->TA arcs
/// carry zero cost; each TA->sink arc has a convex cost in h.
class Network {
 public:
  Network(const Problem& p, const std::vector<std::uint8_t>& y, const std::vector<Level>& windows,
          bool soft, bool squares)
      : p_(p), windows_(windows), soft_(soft && p.mode == PenaltyMode::magnitude), squares_(squares) {
    n_ = 2 + p.K + p.S;
    adj_.resize(n_);
    base_.assign(p.S, 0);
    flow_.assign(p.S, 0);
    cell_arc_.assign(static_cast<std::size_t>(p.S) * p.K, -1);
    for (int k = 0; k < p.K; ++k) {
      std::int64_t residual = p.tasks[k].tau;
      for (int s = 0; s < p.S; ++s) {
        const std::size_t i = p.sk(s, k);
        if (!y[i]) continue;
        residual -= p.cell_lo[i];
        base_[s] += p.cell_lo[i];
        const std::int64_t span = p.cell_hi[i] - p.cell_lo[i];
        if (span > 0) cell_arc_[i] = add_arc(task_node(k), ta_node(s), span);
      }
      if (residual < 0) {
        broken_ = true;
        continue;
      }
      if (residual > 0) add_arc(0, task_node(k), residual);
      required_ += residual;
    }
  }

  /// Pushes the required flow at minimum cost. False if it cannot be routed.
  bool run() {
    if (broken_) return false;
    pot_.assign(n_, Cost{});
    // Only TA->sink arcs can start negative; the graph is acyclic here.
    Cost lowest{};
    bool any = false;
    for (int s = 0; s < p_.S; ++s) {
      const Cost m = forward(s);
      if (!any || m < lowest) lowest = m;
      any = true;
    }
    if (any && lowest < Cost{}) pot_[1] = lowest;

    std::vector<Cost> dist(n_);
    std::vector<char> done(n_);
    std::vector<int> pred_node(n_), pred_arc(n_);
    using Item = std::pair<Cost, int>;
    auto later = [](const Item& a, const Item& b) { return b.first < a.first; };

    std::int64_t pushed = 0;
    while (pushed < required_) {
      std::fill(done.begin(), done.end(), 0);
      std::vector<char> seen(n_, 0);
      std::priority_queue<Item, std::vector<Item>, decltype(later)> heap(later);
      dist[0] = Cost{};
      seen[0] = 1;
      heap.push({Cost{}, 0});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (done[u]) continue;
        done[u] = 1;
        auto relax = [&](int v, const Cost& c, int arc) {
          const Cost nd = d + c + pot_[u] - pot_[v];
          if (!seen[v] || nd < dist[v]) {
            seen[v] = 1;
            dist[v] = nd;
            pred_node[v] = u;
            pred_arc[v] = arc;
            heap.push({nd, v});
          }
        };
        for (int a = 0; a < static_cast<int>(adj_[u].size()); ++a) {
          const Arc& arc = adj_[u][a];
          if (arc.cap > 0 && !done[arc.to]) relax(arc.to, Cost{}, a);
        }
        if (u >= 2 + p_.K) {
          const int s = u - 2 - p_.K;
          if (!done[1]) relax(1, forward(s), -1);
        } else if (u == 1) {
          for (int s = 0; s < p_.S; ++s) {
            if (flow_[s] > 0 && !done[ta_node(s)]) relax(ta_node(s), backward(s), -2);
          }
        }
      }
      if (!done[1]) return false;

      std::int64_t amount = required_ - pushed;
      for (int v = 1; v != 0; v = pred_node[v]) {
        const int u = pred_node[v];
        if (pred_arc[v] >= 0) {
          amount = std::min(amount, adj_[u][pred_arc[v]].cap);
        } else if (pred_arc[v] == -1) {
          amount = std::min(amount, forward_run(u - 2 - p_.K));
        } else {
          amount = std::min(amount, backward_run(v - 2 - p_.K));
        }
      }
      for (int v = 1; v != 0; v = pred_node[v]) {
        const int u = pred_node[v];
        if (pred_arc[v] >= 0) {
          Arc& arc = adj_[u][pred_arc[v]];
          arc.cap -= amount;
          adj_[arc.to][arc.rev].cap += amount;
        } else if (pred_arc[v] == -1) {
          flow_[u - 2 - p_.K] += amount;
        } else {
          flow_[v - 2 - p_.K] -= amount;
        }
      }
      pushed += amount;

      const Cost dt = dist[1];
      for (int v = 0; v < n_; ++v) {
        const Cost dv = done[v] && dist[v] < dt ? dist[v] : dt;
        pot_[v] = pot_[v] + dv;
      }
    }
    return true;
  }

  std::int64_t h(int s) const { return base_[s] + flow_[s]; }

  /// Total distance of the h values from their windows.
  std::int64_t window_excess() const {
    std::int64_t total = 0;
    for (int s = 0; s < p_.S; ++s) total += value(s, h(s)).hard;
    return total;
  }

  int x(int s, int k, const std::vector<std::uint8_t>& y) const {
    const std::size_t i = p_.sk(s, k);
    if (!y[i]) return 0;
    int value = p_.cell_lo[i];
    if (cell_arc_[i] >= 0) {
      const Arc& arc = adj_[task_node(k)][cell_arc_[i]];
      value += static_cast<int>(p_.cell_hi[i] - p_.cell_lo[i] - arc.cap);
    }
    return value;
  }

 private:
  int task_node(int k) const { return 2 + k; }
  int ta_node(int s) const { return 2 + p_.K + s; }

  int add_arc(int u, int v, std::int64_t cap) {
    adj_[u].push_back({v, static_cast<int>(adj_[v].size()), cap});
    adj_[v].push_back({u, static_cast<int>(adj_[u].size()) - 1, 0});
    return static_cast<int>(adj_[u].size()) - 1;
  }

  Cost value(int s, std::int64_t hv) const {
    const Level& w = windows_[s];
    Cost c;
    c.hard = std::max<std::int64_t>(0, w.lo - hv) + std::max<std::int64_t>(0, hv - w.hi);
    if (soft_) c.soft = p_.hours_cost(s, hv);
    if (squares_) c.sq = (hv - p_.target[s]) * (hv - p_.target[s]);
    return c;
  }

  Cost forward(int s) const { return value(s, h(s) + 1) - value(s, h(s)); }
  Cost backward(int s) const { return value(s, h(s) - 1) - value(s, h(s)); }

  std::int64_t next_break(int s, std::int64_t hv) const {
    if (squares_) return hv + 1;
    std::int64_t best = kInf;
    auto consider = [&](std::int64_t b) {
      if (b > hv) best = std::min(best, b);
    };
    consider(windows_[s].lo);
    consider(windows_[s].hi);
    if (soft_) {
      consider(p_.target[s] - p_.bounds.soft_dev);
      consider(p_.target[s]);
      consider(p_.target[s] + p_.bounds.soft_dev);
    }
    return best;
  }

  std::int64_t prev_break(int s, std::int64_t hv) const {
    if (squares_) return hv - 1;
    std::int64_t best = -kInf;
    auto consider = [&](std::int64_t b) {
      if (b < hv) best = std::max(best, b);
    };
    consider(windows_[s].lo);
    consider(windows_[s].hi);
    if (soft_) {
      consider(p_.target[s] - p_.bounds.soft_dev);
      consider(p_.target[s]);
      consider(p_.target[s] + p_.bounds.soft_dev);
    }
    return best;
  }

  std::int64_t forward_run(int s) const {
    const std::int64_t b = next_break(s, h(s));
    return b >= kInf ? kInf : b - h(s);
  }

  std::int64_t backward_run(int s) const {
    const std::int64_t b = prev_break(s, h(s));
    return std::min(flow_[s], b <= -kInf ? kInf : h(s) - b);
  }

  const Problem& p_;
  const std::vector<Level>& windows_;
  bool soft_;
  bool squares_;
  int n_ = 0;
  bool broken_ = false;
  std::int64_t required_ = 0;
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::int64_t> base_;
  std::vector<std::int64_t> flow_;
  std::vector<int> cell_arc_;
  std::vector<Cost> pot_;
};

struct FlowOutcome {
  bool feasible = false;
  std::vector<std::int64_t> h;
  std::vector<int> x;
};

FlowOutcome route(const Problem& p, const std::vector<std::uint8_t>& y, const std::vector<Level>& windows,
                  bool soft, bool squares, bool want_x) {
  Network net(p, y, windows, soft, squares);
  FlowOutcome out;
  if (!net.run() || net.window_excess() != 0) return out;
  out.feasible = true;
  out.h.resize(p.S);
  for (int s = 0; s < p.S; ++s) out.h[s] = net.h(s);
  if (want_x) {
    out.x.assign(static_cast<std::size_t>(p.S) * p.K, 0);
    for (int s = 0; s < p.S; ++s)
      for (int k = 0; k < p.K; ++k) out.x[p.sk(s, k)] = net.x(s, k, y);
  }
  return out;
}

std::int64_t total_cost(const Problem& p, const std::vector<std::int64_t>& h) {
  std::int64_t sum = 0;
  for (int s = 0; s < p.S; ++s) sum += p.hours_cost(s, h[s]);
  return sum;
}

std::vector<Level> hard_windows(const Problem& p) {
  std::vector<Level> w(p.S);
  for (int s = 0; s < p.S; ++s) w[s] = {p.hard_lo[s], p.hard_hi[s], 0};
  return w;
}

/// Index of the tightest level containing h.
std::size_t level_of(const Problem& p, int s, std::int64_t h) {
  const auto& levels = p.levels[s];
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].lo <= h && h <= levels[i].hi) return i;
  }
  return levels.size() - 1;
}

class LevelSearch {
 public:
  LevelSearch(const Problem& p, const std::vector<std::uint8_t>& y, std::uint64_t cap)
      : p_(p), y_(y), cap_(cap), windows_(hard_windows(p)) {}

  HoursResult run(bool tie_break) {
    HoursResult r;
    FlowOutcome root = flow();
    if (!root.feasible) {
      r.flows = flows_;
      return r;
    }
    best_h_ = root.h;
    best_ = total_cost(p_, root.h);
    relax();

    for (int s = 0; s < p_.S; ++s) {
      if (p_.levels[s].size() > 1) order_.push_back(s);
      floor_ += p_.levels[s].front().cost;
    }
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return spread(a) > spread(b);
    });
    suffix_.assign(order_.size() + 1, 0);
    for (std::size_t i = order_.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + p_.levels[order_[i]].front().cost;
    const std::int64_t fixed = floor_ - suffix_[0];
    if (best_ > floor_) dfs(0, fixed);

    r.feasible = true;
    r.exact = exact_;
    // Final distribution inside the windows the best h reaches.
    for (int s = 0; s < p_.S; ++s) windows_[s] = p_.levels[s][level_of(p_, s, best_h_[s])];
    FlowOutcome fin = route(p_, y_, windows_, false, tie_break, true);
    ++flows_;
    r.h = fin.h;
    r.x = fin.x;
    r.cost = total_cost(p_, fin.h);
    r.flows = flows_;
    return r;
  }

 private:
  /// Start every TA in its cheapest window, route with distance to the
  /// windows as the cost, and loosen the windows of the TAs left outside
  /// until nobody is. A quick incumbent for the search below.
  void relax() {
    std::vector<std::size_t> at(p_.S, 0);
    for (int s = 0; s < p_.S; ++s) windows_[s] = p_.levels[s].front();
    for (;;) {
      if (cap_ && flows_ >= cap_) break;
      ++flows_;
      Network net(p_, y_, windows_, false, false);
      if (!net.run()) break;
      bool loosened = false;
      std::vector<std::int64_t> h(p_.S);
      for (int s = 0; s < p_.S; ++s) {
        h[s] = net.h(s);
        if (h[s] >= windows_[s].lo && h[s] <= windows_[s].hi) continue;
        if (at[s] + 1 < p_.levels[s].size()) {
          windows_[s] = p_.levels[s][++at[s]];
          loosened = true;
        }
      }
      if (!loosened) {
        if (net.window_excess() == 0) {
          const std::int64_t got = total_cost(p_, h);
          if (got < best_) best_ = got, best_h_ = h;
        }
        break;
      }
    }
    windows_ = hard_windows(p_);
  }

  std::int64_t spread(int s) const { return p_.levels[s].back().cost - p_.levels[s].front().cost; }

  FlowOutcome flow() {
    ++flows_;
    return route(p_, y_, windows_, false, false, false);
  }

  void dfs(std::size_t depth, std::int64_t cost) {
    if (depth == order_.size() || stop_) return;
    const int s = order_[depth];
    const auto& levels = p_.levels[s];
    for (std::size_t i = 0; i < levels.size() && !stop_; ++i) {
      const std::int64_t c = cost + levels[i].cost;
      if (c + suffix_[depth + 1] >= best_) break;
      if (cap_ && flows_ >= cap_) {
        stop_ = true;
        exact_ = false;
        break;
      }
      windows_[s] = levels[i];
      FlowOutcome f = i + 1 == levels.size() ? FlowOutcome{true, {}, {}} : flow();
      if (f.feasible) {
        if (!f.h.empty()) {
          const std::int64_t got = total_cost(p_, f.h);
          if (got < best_) {
            best_ = got;
            best_h_ = f.h;
          }
        }
        dfs(depth + 1, c);
      }
    }
    windows_[s] = Level{p_.hard_lo[s], p_.hard_hi[s], 0};
  }

  const Problem& p_;
  const std::vector<std::uint8_t>& y_;
  std::uint64_t cap_;
  std::vector<Level> windows_;
  std::vector<int> order_;
  std::vector<std::int64_t> suffix_;
  std::int64_t floor_ = 0;
  std::int64_t best_ = 0;
  std::vector<std::int64_t> best_h_;
  std::uint64_t flows_ = 0;
  bool exact_ = true;
  bool stop_ = false;
};

}  // namespace

std::vector<std::int64_t> closest_hours(const Problem& p, const std::vector<std::uint8_t>& y) {
  const std::vector<Level> windows = hard_windows(p);
  Network net(p, y, windows, false, false);
  if (!net.run()) return {};
  std::vector<std::int64_t> h(p.S);
  for (int s = 0; s < p.S; ++s) h[s] = net.h(s);
  return h;
}

HoursResult solve_hours(const Problem& p, const std::vector<std::uint8_t>& y, const HoursOptions& opt) {
  if (p.mode == PenaltyMode::indicator) return LevelSearch(p, y, opt.level_cap).run(opt.tie_break);

  HoursResult r;
  FlowOutcome f = route(p, y, hard_windows(p), true, opt.tie_break, true);
  r.flows = 1;
  if (!f.feasible) return r;
  r.feasible = true;
  r.h = std::move(f.h);
  r.x = std::move(f.x);
  r.cost = total_cost(p, r.h);
  return r;
}

}  // namespace tap::solver::detail
