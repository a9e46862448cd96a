#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tap/assignment.hpp"
#include "tap/model.hpp"

namespace tap::solver {

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

enum class Status { optimal, feasible_timeout, infeasible, unknown };

std::string_view to_string(Status status);

/// One anytime record: elapsed seconds, incumbent objective (absent before the
/// first solution), proven lower bound and nodes explored so far.
struct Progress {
  double seconds = 0;
  std::optional<std::int64_t> incumbent;
  std::int64_t lower_bound = 0;
  std::uint64_t nodes = 0;
};

/// `t=<sec> inc=<obj|none> lb=<bound> nodes=<n>`
std::string format_progress(const Progress& p);

struct SolveConfig {
  double time_limit = 60;
  std::uint64_t seed = 0;
  int thread_budget = 1;
  bool optimality_required = false;
  double log_interval = 1;
  /// Deterministic work cap (search nodes); 0 = none.
  std::uint64_t node_limit = 0;
  /// Among equal-penalty schedules prefer the smallest sum of (h - target)^2.
  bool tie_break = false;
  std::function<void(const Progress&)> on_progress;
  std::shared_ptr<std::atomic<bool>> cancel;
};

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t propagations = 0;
  std::uint64_t leaves = 0;
  std::uint64_t flows = 0;
  double wall_seconds = 0;
};

struct SolveOutcome {
  Status status = Status::unknown;
  std::optional<Assignment> best;
  std::int64_t objective = 0;
  std::int64_t lower_bound = 0;
  SolveStats stats;
  /// Every incumbent improvement and bound increase, in order.
  std::vector<Progress> trace;
  /// For infeasible outcomes found at the root: the failing family, e.g. "Eq13[c0]".
  std::string reason;
};

/// Solution file for an outcome: `# status`, `# objective` and
/// `# lower_bound` comments, then the hours lines when a schedule exists.
std::string solution_text(const SolveOutcome& outcome);

/// Exact branch-and-bound over y with an exact hour subproblem at the leaves;
/// large instances fall back to large-neighborhood search from warm_start.
/// Needs a model compiled from an instance (ir.source).
SolveOutcome solve(const model::ModelIR& ir, const SolveConfig& cfg);

/// Greedy hard-feasible schedule, or nullopt.
std::optional<Assignment> warm_start(const model::ModelIR& ir, const SolveConfig& cfg);

/// Exhaustive enumeration of integer valuations of the IR's structural
/// variables with forward checking. Works on any IR (no instance needed).
/// Throws BudgetExceeded once more than `budget` nodes are visited.
SolveOutcome brute_force(const model::ModelIR& ir, std::uint64_t budget);

/// Calls `visit` with every hard-feasible valuation (realizations set to
/// their smallest admissible values). Same budget rule as brute_force.
void enumerate_feasible(const model::ModelIR& ir, std::uint64_t budget,
                        const std::function<void(const model::Valuation&)>& visit);

}  // namespace tap::solver
