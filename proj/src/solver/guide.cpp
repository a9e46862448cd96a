#include "solver/guide.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace tap::solver::detail {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Edge {
  int to;
  int rev;
  std::int64_t cap;
  std::int64_t cost;
};

/// Successive shortest paths with Johnson potentials.
class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : adj_(n) {}

  int add(int from, int to, std::int64_t cap, std::int64_t cost) {
    adj_[from].push_back({to, static_cast<int>(adj_[to].size()), cap, cost});
    adj_[to].push_back({from, static_cast<int>(adj_[from].size()) - 1, 0, -cost});
    return static_cast<int>(adj_[from].size()) - 1;
  }

  const Edge& edge(int from, int index) const { return adj_[from][index]; }

  /// Min-cost max-flow. Initial potentials come from Bellman-Ford since some
  /// costs are negative (the graph has no negative cycles).
  std::int64_t run(int source, int sink) {
    const int n = static_cast<int>(adj_.size());
    std::vector<std::int64_t> pot(n, kInf);
    pot[source] = 0;
    for (bool changed = true; changed;) {
      changed = false;
      for (int u = 0; u < n; ++u) {
        if (pot[u] == kInf) continue;
        for (const Edge& e : adj_[u])
          if (e.cap > 0 && pot[u] + e.cost < pot[e.to]) pot[e.to] = pot[u] + e.cost, changed = true;
      }
    }
    for (auto& v : pot)
      if (v == kInf) v = 0;

    std::int64_t flow = 0;
    std::vector<std::int64_t> dist(n);
    std::vector<int> prev_node(n), prev_edge(n);
    using Item = std::pair<std::int64_t, int>;
    for (;;) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[source] = 0;
      heap.push({0, source});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int i = 0; i < static_cast<int>(adj_[u].size()); ++i) {
          const Edge& e = adj_[u][i];
          if (e.cap <= 0) continue;
          const std::int64_t nd = d + e.cost + pot[u] - pot[e.to];
          if (nd < dist[e.to]) {
            dist[e.to] = nd;
            prev_node[e.to] = u;
            prev_edge[e.to] = i;
            heap.push({nd, e.to});
          }
        }
      }
      if (dist[sink] == kInf) break;
      for (int v = 0; v < n; ++v)
        if (dist[v] < kInf) pot[v] += dist[v];
      std::int64_t push = kInf;
      for (int v = sink; v != source; v = prev_node[v]) push = std::min(push, adj_[prev_node[v]][prev_edge[v]].cap);
      for (int v = sink; v != source; v = prev_node[v]) {
        Edge& e = adj_[prev_node[v]][prev_edge[v]];
        e.cap -= push;
        adj_[v][e.rev].cap += push;
      }
      flow += push;
    }
    return flow;
  }

 private:
  std::vector<std::vector<Edge>> adj_;
};

}  // namespace

std::vector<std::int64_t> guide_hours(const Problem& p) {
  const int source = 0, sink = 1;
  auto task_node = [&](int k) { return 2 + k; };
  auto ta_node = [&](int s) { return 2 + p.K + s; };
  MinCostFlow f(2 + p.K + p.S);

  std::int64_t demand = 0;
  for (int k = 0; k < p.K; ++k) {
    f.add(source, task_node(k), p.tasks[k].tau, 0);
    demand += p.tasks[k].tau;
  }
  std::vector<int> arc(p.cell.size(), -1);
  for (int s = 0; s < p.S; ++s)
    for (int k = 0; k < p.K; ++k) {
      const std::size_t i = p.sk(s, k);
      if (p.cell[i] == Cell::blocked) continue;
      const std::size_t pc = p.sc(s, p.tasks[k].c);
      std::int64_t cost = 20;
      if (!p.kappa[pc]) cost += 60;
      if (p.course_pin[pc] || p.cell[i] == Cell::forced) cost -= 15;
      cost -= 4 * p.pref[pc];
      cost += static_cast<std::int64_t>((s * 7919 + p.tasks[k].c * 104729) % 8);
      arc[i] = f.add(task_node(k), ta_node(s), p.cell_hi[i], cost);
    }
  // Below the hard window is very cheap, up to target cheap, above it dear.
  for (int s = 0; s < p.S; ++s) {
    const std::int64_t lo = std::max<std::int64_t>(0, p.hard_lo[s]);
    const std::int64_t mid = std::max(lo, std::min(p.target[s], p.hard_hi[s]));
    const std::int64_t hi = std::max<std::int64_t>(mid, p.hard_hi[s]);
    if (lo > 0) f.add(ta_node(s), sink, lo, -1000);
    if (mid > lo) f.add(ta_node(s), sink, mid - lo, -100);
    if (hi > mid) f.add(ta_node(s), sink, hi - mid, 100);
  }
  if (f.run(source, sink) < demand) return {};
  std::vector<std::int64_t> x(p.cell.size(), 0);
  for (int s = 0; s < p.S; ++s)
    for (int k = 0; k < p.K; ++k) {
      const std::size_t i = p.sk(s, k);
      if (arc[i] < 0) continue;
      x[i] = p.cell_hi[i] - f.edge(task_node(k), arc[i]).cap;
    }
  return x;
}

}  // namespace tap::solver::detail
