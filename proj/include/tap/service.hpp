#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tap/instance.hpp"
#include "tap/metrics.hpp"
#include "tap/solver.hpp"

namespace tap::service {

class NotFound : public Error {
 public:
  using Error::Error;
};

class BadEdit : public Error {
 public:
  using Error::Error;
};

/// A solve is already running on the session. Carries its latest progress.
class Busy : public Error {
 public:
  explicit Busy(solver::Progress progress) : Error("a solve is already running"), progress_(progress) {}
  const solver::Progress& progress() const noexcept { return progress_; }

 private:
  solver::Progress progress_;
};

/// The session changed since its last outcome, or was never solved.
class Stale : public Error {
 public:
  using Error::Error;
};

enum class EditKind { pin_hours, pin_course, forbid, set_bound, set_weight };

std::string_view to_string(EditKind kind);
std::optional<EditKind> edit_kind_from_string(std::string_view name);

/// One planner change. pin_hours uses ta, course, task and value (hours);
/// pin_course uses ta and course; forbid uses ta, course and value (1 forbids,
/// 0 lifts the ban); set_bound and set_weight use field and value. Weight
/// fields may be named by key ("soft_courses") or by family ("Eq18").
struct Edit {
  EditKind kind = EditKind::pin_hours;
  std::string ta;
  std::string course;
  std::optional<TaskKind> task;
  std::string field;
  int value = 0;
  std::string note;
  friend bool operator==(const Edit&, const Edit&) = default;
};

Json to_json(const Edit& edit);
/// ParseError on malformed documents.
Edit edit_from_json(const Json& doc);

/// Base instance with `edits` applied in order. A later pin on the same cell
/// replaces an earlier one. BadEdit names the offending edit.
Instance apply_edits(const Instance& base, const std::vector<Edit>& edits);

Json to_json(const solver::SolveConfig& cfg);
/// Missing keys keep their defaults; callbacks and cancel flags are not
/// serialized.
solver::SolveConfig config_from_json(const Json& doc);

Json to_json(const solver::Progress& progress);

/// The reproducible part of an outcome: status, objective, bound, reason and
/// the solution file text. Timings and counters are left out.
Json outcome_record(const solver::SolveOutcome& outcome);

/// Outcome record plus stats and trace.
Json outcome_json(const solver::SolveOutcome& outcome);

/// Solves the base instance with `edits` applied, as a session would.
solver::SolveOutcome solve_edited(const Instance& base, const std::vector<Edit>& edits,
                                  const solver::SolveConfig& cfg);

/// Re-solves a session snapshot (see Store::snapshot) and returns the fresh
/// outcome record. Replay is exact when the stored config has
/// thread_budget 1 and the solve ended by node_limit or by proof.
Json replay(const Json& snapshot);

enum class SolveState { idle, running, done };

std::string_view to_string(SolveState state);

/// In-memory session store with optional on-disk snapshots. All methods are
/// thread-safe; mutations of one session are serialized.
class Store {
 public:
  /// With a directory, every revision is written to <dir>/<id>.json and
  /// existing snapshots are loaded back.
  explicit Store(std::optional<std::filesystem::path> dir = std::nullopt);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  std::string create(const Instance& instance);
  std::vector<std::string> ids() const;

  /// Appends the edit, bumps the revision and marks the outcome stale.
  int apply_edit(const std::string& id, const Edit& edit);

  /// Starts a background solve of the current revision. Throws Busy.
  int start_solve(const std::string& id, solver::SolveConfig cfg);
  /// Blocks until the session has no running solve.
  void wait(const std::string& id);
  /// start_solve then wait; returns the stored outcome.
  solver::SolveOutcome resolve(const std::string& id, solver::SolveConfig cfg);
  /// Requests cancellation; false when nothing runs.
  bool cancel(const std::string& id);

  /// Session summary: id, revision, state, stale flag, edits and instance.
  Json describe(const std::string& id) const;
  /// Instance with every edit applied.
  Instance current_instance(const std::string& id) const;
  /// Outcome of the last finished solve with its revision and stale flag.
  Json outcome(const std::string& id) const;
  /// Reports for the last outcome and, if given, a manual schedule, with the
  /// comparison table. Throws Stale.
  Json report(const std::string& id, const std::optional<Assignment>& manual) const;
  /// Progress records of the current or last solve from index `from` on;
  /// `finished` tells whether more can follow.
  std::vector<solver::Progress> events(const std::string& id, std::size_t from, bool& finished) const;
  /// Blocks until a new event arrives, the solve ends or `seconds` pass.
  void wait_event(const std::string& id, std::size_t have, double seconds) const;

  /// Base instance, edit log, config and outcome record of the session.
  Json snapshot(const std::string& id) const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  void persist(const Session& session) const;
  std::string fresh_id();

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

/// Reads a solution file against an instance (the format written by solve).
Assignment read_solution(const Instance& instance, std::string_view text);

/// HTTP front of a store. Blocks in listen() until stop().
class Server {
 public:
  explicit Server(Store& store);
  ~Server();
  /// Binds and serves; returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it; serve with listen_after_bind().
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tap::service
