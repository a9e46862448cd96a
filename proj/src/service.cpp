#include "tap/service.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "tap/encode.hpp"
#include "tap/model.hpp"
#include "tap/verify.hpp"

namespace tap::service {

namespace {

constexpr std::pair<EditKind, std::string_view> kEditNames[] = {
    {EditKind::pin_hours, "pin_hours"}, {EditKind::pin_course, "pin_course"}, {EditKind::forbid, "forbid"},
    {EditKind::set_bound, "set_bound"}, {EditKind::set_weight, "set_weight"},
};

std::string str_field(const Json& doc, const char* key, bool required) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    if (required) throw ParseError(std::string("edit: missing key '") + key + "'");
    return "";
  }
  if (!it->is_string()) throw ParseError(std::string("edit.") + key + ": expected string");
  return it->get<std::string>();
}

std::optional<solver::Status> status_from_string(std::string_view name) {
  for (auto s : {solver::Status::optimal, solver::Status::feasible_timeout, solver::Status::infeasible,
                 solver::Status::unknown})
    if (solver::to_string(s) == name) return s;
  return std::nullopt;
}

std::int64_t int_field(const Json& doc, const char* key, std::int64_t fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number_integer()) throw ParseError(std::string("config.") + key + ": expected integer");
  return it->get<std::int64_t>();
}

double num_field(const Json& doc, const char* key, double fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number()) throw ParseError(std::string("config.") + key + ": expected number");
  return it->get<double>();
}

bool bool_field(const Json& doc, const char* key, bool fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_boolean()) throw ParseError(std::string("config.") + key + ": expected boolean");
  return it->get<bool>();
}

std::string edit_name(std::size_t index, const Edit& e) {
  return "edit " + std::to_string(index) + " (" + std::string(to_string(e.kind)) + ")";
}

void apply_one(InstanceSpec& spec, const Edit& e, std::size_t index) {
  const std::string where = edit_name(index, e);
  auto need_pair = [&] {
    const bool ta = std::any_of(spec.tas.begin(), spec.tas.end(), [&](const auto& x) { return x.id == e.ta; });
    if (!ta) throw BadEdit(where + ": unknown TA '" + e.ta + "'");
    const bool course =
        std::any_of(spec.courses.begin(), spec.courses.end(), [&](const auto& x) { return x.id == e.course; });
    if (!course) throw BadEdit(where + ": unknown course '" + e.course + "'");
  };
  switch (e.kind) {
    case EditKind::pin_hours: {
      need_pair();
      if (!e.task) throw BadEdit(where + ": task missing");
      std::erase_if(spec.pins, [&](const Pin& p) {
        return p.ta_id == e.ta && p.course_id == e.course && p.task == e.task;
      });
      spec.pins.push_back({e.ta, e.course, e.task, e.value});
      break;
    }
    case EditKind::pin_course: {
      need_pair();
      const Pin pin{e.ta, e.course, std::nullopt, std::nullopt};
      if (std::find(spec.pins.begin(), spec.pins.end(), pin) == spec.pins.end()) spec.pins.push_back(pin);
      break;
    }
    case EditKind::forbid: {
      need_pair();
      auto it = std::find_if(spec.pairs.begin(), spec.pairs.end(),
                             [&](const PairData& p) { return p.ta_id == e.ta && p.course_id == e.course; });
      if (it == spec.pairs.end()) it = spec.pairs.insert(spec.pairs.end(), PairData{e.ta, e.course});
      it->forbidden = e.value != 0;
      break;
    }
    case EditKind::set_bound: {
      Json b = to_json(spec.bounds);
      if (!b.contains(e.field)) throw BadEdit(where + ": unknown bound '" + e.field + "'");
      b[e.field] = e.value;
      spec.bounds = bounds_from_json(b);
      break;
    }
    case EditKind::set_weight: {
      if (e.value < 0) throw BadEdit(where + ": weights must be non-negative");
      if (auto family = model::soft_family_from_tag(e.field)) {
        model::set_family_weight(spec.weights, *family, e.value);
        break;
      }
      Json w = to_json(spec.weights);
      if (!w.contains(e.field) || e.field == "penalty_mode")
        throw BadEdit(where + ": unknown weight '" + e.field + "'");
      w[e.field] = e.value;
      spec.weights = weights_from_json(w);
      break;
    }
  }
}

}  // namespace

std::string_view to_string(EditKind kind) {
  for (const auto& [k, name] : kEditNames)
    if (k == kind) return name;
  return "pin_hours";
}

std::optional<EditKind> edit_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kEditNames)
    if (n == name) return k;
  return std::nullopt;
}

Json to_json(const Edit& e) {
  Json j;
  j["kind"] = std::string(to_string(e.kind));
  switch (e.kind) {
    case EditKind::pin_hours:
      j["ta"] = e.ta;
      j["course"] = e.course;
      j["task"] = e.task ? std::string(to_string(*e.task)) : std::string();
      j["hours"] = e.value;
      break;
    case EditKind::pin_course:
      j["ta"] = e.ta;
      j["course"] = e.course;
      break;
    case EditKind::forbid:
      j["ta"] = e.ta;
      j["course"] = e.course;
      j["value"] = e.value != 0;
      break;
    case EditKind::set_bound:
    case EditKind::set_weight:
      j["field"] = e.field;
      j["value"] = e.value;
      break;
  }
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

Edit edit_from_json(const Json& doc) {
  if (!doc.is_object()) throw ParseError("edit: expected object");
  Edit e;
  const std::string kind = str_field(doc, "kind", true);
  auto k = edit_kind_from_string(kind);
  if (!k) throw ParseError("edit.kind: unknown kind '" + kind + "'");
  e.kind = *k;
  e.note = str_field(doc, "note", false);
  auto integer = [&](const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("edit: missing key '") + key + "'");
    if (!it->is_number_integer()) throw ParseError(std::string("edit.") + key + ": expected integer");
    const auto v = it->get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      throw ParseError(std::string("edit.") + key + ": out of range");
    return static_cast<int>(v);
  };
  switch (e.kind) {
    case EditKind::pin_hours: {
      e.ta = str_field(doc, "ta", true);
      e.course = str_field(doc, "course", true);
      const std::string task = str_field(doc, "task", true);
      e.task = task_kind_from_string(task);
      if (!e.task) throw ParseError("edit.task: unknown task kind '" + task + "'");
      e.value = integer("hours");
      break;
    }
    case EditKind::pin_course:
      e.ta = str_field(doc, "ta", true);
      e.course = str_field(doc, "course", true);
      break;
    case EditKind::forbid: {
      e.ta = str_field(doc, "ta", true);
      e.course = str_field(doc, "course", true);
      e.value = 1;
      if (auto it = doc.find("value"); it != doc.end()) {
        if (!it->is_boolean()) throw ParseError("edit.value: expected boolean");
        e.value = it->get<bool>() ? 1 : 0;
      }
      break;
    }
    case EditKind::set_bound:
    case EditKind::set_weight:
      e.field = str_field(doc, "field", true);
      e.value = integer("value");
      break;
  }
  return e;
}

Instance apply_edits(const Instance& base, const std::vector<Edit>& edits) {
  if (edits.empty()) return base;
  InstanceSpec spec = base.spec();
  for (std::size_t i = 0; i < edits.size(); ++i) {
    try {
      apply_one(spec, edits[i], i);
      if (i + 1 < edits.size()) Instance::from_spec(spec);
    } catch (const BadEdit&) {
      throw;
    } catch (const Error& err) {
      throw BadEdit(edit_name(i, edits[i]) + ": " + err.what());
    }
  }
  try {
    return Instance::from_spec(std::move(spec));
  } catch (const Error& err) {
    throw BadEdit(edit_name(edits.size() - 1, edits.back()) + ": " + err.what());
  }
}

Json to_json(const solver::SolveConfig& cfg) {
  Json j;
  j["time_limit"] = cfg.time_limit;
  j["seed"] = cfg.seed;
  j["thread_budget"] = cfg.thread_budget;
  j["optimality_required"] = cfg.optimality_required;
  j["log_interval"] = cfg.log_interval;
  j["node_limit"] = cfg.node_limit;
  j["tie_break"] = cfg.tie_break;
  return j;
}

solver::SolveConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw ParseError("config: expected object");
  solver::SolveConfig cfg;
  cfg.time_limit = num_field(doc, "time_limit", cfg.time_limit);
  const std::int64_t seed = int_field(doc, "seed", 0);
  const std::int64_t threads = int_field(doc, "thread_budget", cfg.thread_budget);
  const std::int64_t nodes = int_field(doc, "node_limit", 0);
  if (cfg.time_limit <= 0) throw ParseError("config.time_limit: must be positive");
  if (seed < 0 || nodes < 0) throw ParseError("config: seed and node_limit must be non-negative");
  if (threads < 1 || threads > 256) throw ParseError("config.thread_budget: must be in [1,256]");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.thread_budget = static_cast<int>(threads);
  cfg.node_limit = static_cast<std::uint64_t>(nodes);
  cfg.optimality_required = bool_field(doc, "optimality_required", cfg.optimality_required);
  cfg.log_interval = num_field(doc, "log_interval", cfg.log_interval);
  cfg.tie_break = bool_field(doc, "tie_break", cfg.tie_break);
  return cfg;
}

Json to_json(const solver::Progress& p) {
  Json j;
  j["seconds"] = p.seconds;
  j["incumbent"] = p.incumbent ? Json(*p.incumbent) : Json(nullptr);
  j["lower_bound"] = p.lower_bound;
  j["nodes"] = p.nodes;
  j["line"] = solver::format_progress(p);
  return j;
}

Json outcome_record(const solver::SolveOutcome& o) {
  Json j;
  j["status"] = std::string(solver::to_string(o.status));
  j["objective"] = o.best ? Json(o.objective) : Json(nullptr);
  j["lower_bound"] = o.lower_bound;
  j["reason"] = o.reason;
  j["solution"] = solver::solution_text(o);
  return j;
}

Json outcome_json(const solver::SolveOutcome& o) {
  Json j = outcome_record(o);
  Json stats;
  stats["nodes"] = o.stats.nodes;
  stats["propagations"] = o.stats.propagations;
  stats["leaves"] = o.stats.leaves;
  stats["flows"] = o.stats.flows;
  stats["wall_seconds"] = o.stats.wall_seconds;
  j["stats"] = std::move(stats);
  Json trace = Json::array();
  for (const auto& p : o.trace) trace.push_back(to_json(p));
  j["trace"] = std::move(trace);
  return j;
}

solver::SolveOutcome solve_edited(const Instance& base, const std::vector<Edit>& edits,
                                  const solver::SolveConfig& cfg) {
  auto inst = std::make_shared<const Instance>(apply_edits(base, edits));
  return solver::solve(model::build(inst), cfg);
}

Assignment read_solution(const Instance& instance, std::string_view text) {
  return encode::parse_solution(encode::to_lp(model::build(instance)), text);
}

std::string_view to_string(SolveState state) {
  switch (state) {
    case SolveState::idle: return "idle";
    case SolveState::running: return "running";
    case SolveState::done: return "done";
  }
  return "idle";
}

// ---- sessions ------------------------------------------------------------

struct Store::Session {
  Session(std::string id_, Instance base_) : id(std::move(id_)), base(std::move(base_)) {}

  std::string id;
  Instance base;
  std::vector<Edit> edits;  // the revision is edits.size()

  mutable std::mutex mu;
  mutable std::condition_variable cv;
  SolveState state = SolveState::idle;
  std::optional<solver::SolveOutcome> outcome;
  int outcome_revision = -1;
  solver::SolveConfig outcome_cfg;
  std::vector<solver::Progress> events;
  std::shared_ptr<std::atomic<bool>> cancel;
  std::thread worker;

  int revision() const { return static_cast<int>(edits.size()); }
  bool stale() const { return !outcome || outcome_revision != revision(); }
};

namespace {

Json snapshot_of(const std::string& id, const Instance& base, const std::vector<Edit>& edits,
                 const std::optional<solver::SolveOutcome>& outcome, int outcome_revision,
                 const solver::SolveConfig& cfg) {
  Json j;
  j["id"] = id;
  j["revision"] = edits.size();
  j["instance"] = to_json(base);
  Json log = Json::array();
  for (const auto& e : edits) log.push_back(to_json(e));
  j["edits"] = std::move(log);
  if (outcome) {
    Json o;
    o["revision"] = outcome_revision;
    o["config"] = to_json(cfg);
    o["record"] = outcome_record(*outcome);
    j["outcome"] = std::move(o);
  } else {
    j["outcome"] = nullptr;
  }
  return j;
}

std::vector<Edit> edits_of(const Json& snapshot, std::size_t count) {
  const Json& log = snapshot.at("edits");
  if (!log.is_array() || log.size() < count) throw ParseError("snapshot.edits: too short");
  std::vector<Edit> edits;
  for (std::size_t i = 0; i < count; ++i) edits.push_back(edit_from_json(log[i]));
  return edits;
}

}  // namespace

Json replay(const Json& snapshot) {
  const Json& o = snapshot.at("outcome");
  if (o.is_null()) throw Stale("snapshot has no outcome to replay");
  const Instance base = instance_from_json(snapshot.at("instance"));
  const auto edits = edits_of(snapshot, o.at("revision").get<std::size_t>());
  return outcome_record(solve_edited(base, edits, config_from_json(o.at("config"))));
}

Store::Store(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (!dir_) return;
  std::filesystem::create_directories(*dir_);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(*dir_))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    const Json snap = Json::parse(in);
    auto session = std::make_shared<Session>(snap.at("id").get<std::string>(),
                                                   instance_from_json(snap.at("instance")));
    session->edits = edits_of(snap, snap.at("edits").size());
    if (const Json& o = snap.at("outcome"); !o.is_null()) {
      const Json& rec = o.at("record");
      solver::SolveOutcome out;
      out.status = status_from_string(rec.at("status").get<std::string>()).value_or(solver::Status::unknown);
      out.lower_bound = rec.at("lower_bound").get<std::int64_t>();
      out.reason = rec.at("reason").get<std::string>();
      session->outcome_revision = o.at("revision").get<int>();
      session->outcome_cfg = config_from_json(o.at("config"));
      if (!rec.at("objective").is_null()) {
        out.objective = rec.at("objective").get<std::int64_t>();
        const std::vector<Edit> prefix(session->edits.begin(), session->edits.begin() + session->outcome_revision);
        out.best = read_solution(apply_edits(session->base, prefix), rec.at("solution").get<std::string>());
      }
      session->outcome = std::move(out);
      session->state = SolveState::done;
    }
    sessions_[session->id] = std::move(session);
  }
}

Store::~Store() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, s] : sessions_) all.push_back(s);
  }
  for (auto& s : all) {
    std::thread worker;
    {
      std::lock_guard lock(s->mu);
      if (s->cancel) s->cancel->store(true);
      worker = std::move(s->worker);
    }
    if (worker.joinable()) worker.join();
  }
}

std::string Store::fresh_id() {
  static thread_local std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%012llx", static_cast<unsigned long long>(rng() >> 16));
    if (!sessions_.count(buf)) return buf;
  }
}

std::shared_ptr<Store::Session> Store::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
  return it->second;
}

void Store::persist(const Session& s) const {
  if (!dir_) return;
  const Json snap = snapshot_of(s.id, s.base, s.edits, s.outcome, s.outcome_revision, s.outcome_cfg);
  const auto path = *dir_ / (s.id + ".json");
  const auto tmp = *dir_ / (s.id + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << snap.dump(2) << '\n';
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string Store::create(const Instance& instance) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    s = std::make_shared<Session>(fresh_id(), instance);
    sessions_[s->id] = s;
  }
  std::lock_guard lock(s->mu);
  persist(*s);
  return s->id;
}

std::vector<std::string> Store::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

int Store::apply_edit(const std::string& id, const Edit& edit) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  std::vector<Edit> next = s->edits;
  next.push_back(edit);
  apply_edits(s->base, next);  // throws BadEdit
  s->edits = std::move(next);
  persist(*s);
  return s->revision();
}

int Store::start_solve(const std::string& id, solver::SolveConfig cfg) {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  if (s->state == SolveState::running) {
    solver::Progress last;
    if (!s->events.empty()) last = s->events.back();
    throw Busy(last);
  }
  if (s->worker.joinable()) s->worker.join();
  const int revision = s->revision();
  auto inst = std::make_shared<const Instance>(apply_edits(s->base, s->edits));
  s->events.clear();
  s->cancel = std::make_shared<std::atomic<bool>>(false);
  s->state = SolveState::running;
  const solver::SolveConfig stored = cfg;
  cfg.cancel = s->cancel;
  Session* raw = s.get();
  cfg.on_progress = [raw](const solver::Progress& p) {
    std::lock_guard l(raw->mu);
    raw->events.push_back(p);
    raw->cv.notify_all();
  };
  s->worker = std::thread([this, raw, inst, cfg, stored, revision] {
    solver::SolveOutcome out;
    try {
      out = solver::solve(model::build(inst), cfg);
    } catch (const std::exception& e) {
      out.status = solver::Status::unknown;
      out.reason = std::string("internal: ") + e.what();
    }
    std::lock_guard l(raw->mu);
    raw->outcome = std::move(out);
    raw->outcome_revision = revision;
    raw->outcome_cfg = stored;
    raw->state = SolveState::done;
    try {
      persist(*raw);
    } catch (const std::exception&) {
      // The outcome stays in memory; the next revision retries the write.
    }
    raw->cv.notify_all();
  });
  return revision;
}

void Store::wait(const std::string& id) {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  s->cv.wait(lock, [&] { return s->state != SolveState::running; });
}

solver::SolveOutcome Store::resolve(const std::string& id, solver::SolveConfig cfg) {
  start_solve(id, std::move(cfg));
  wait(id);
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return *s->outcome;
}

bool Store::cancel(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state != SolveState::running || !s->cancel) return false;
  s->cancel->store(true);
  return true;
}

Json Store::describe(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  Json j;
  j["id"] = s->id;
  j["revision"] = s->revision();
  j["state"] = std::string(to_string(s->state));
  j["stale"] = s->stale();
  Json log = Json::array();
  for (const auto& e : s->edits) log.push_back(to_json(e));
  j["edits"] = std::move(log);
  j["instance"] = to_json(apply_edits(s->base, s->edits));
  return j;
}

Instance Store::current_instance(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return apply_edits(s->base, s->edits);
}

Json Store::outcome(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  Json j;
  j["revision"] = s->revision();
  j["state"] = std::string(to_string(s->state));
  j["stale"] = s->stale();
  j["outcome_revision"] = s->outcome ? Json(s->outcome_revision) : Json(nullptr);
  j["outcome"] = s->outcome ? outcome_json(*s->outcome) : Json(nullptr);
  return j;
}

Json Store::report(const std::string& id, const std::optional<Assignment>& manual) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state == SolveState::running) throw Stale("a solve is running");
  if (s->stale()) throw Stale("the session changed since its last outcome");
  if (!s->outcome->best) throw Stale("the last outcome has no schedule");
  const Instance inst = apply_edits(s->base, s->edits);
  std::vector<metrics::Report> reports{metrics::build_report(inst, *s->outcome->best, "tap",
                                                             std::string(solver::to_string(s->outcome->status)),
                                                             s->outcome->stats.wall_seconds)};
  Json verdicts = Json::array();
  verdicts.push_back(verify::to_json(verify::check(inst, *s->outcome->best, verify::Mode::audit)));
  if (manual) {
    reports.push_back(metrics::build_report(inst, *manual, "manual"));
    verdicts.push_back(verify::to_json(verify::check(inst, *manual, verify::Mode::audit)));
  }
  const metrics::Comparison table = metrics::compare(reports);
  Json j;
  j["revision"] = s->revision();
  Json rs = Json::array();
  for (const auto& r : reports) rs.push_back(metrics::to_json(r));
  j["reports"] = std::move(rs);
  j["verdicts"] = std::move(verdicts);
  j["comparison"] = {{"csv", table.csv()}, {"text", table.text()}};
  return j;
}

std::vector<solver::Progress> Store::events(const std::string& id, std::size_t from, bool& finished) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  finished = s->state != SolveState::running;
  if (from >= s->events.size()) return {};
  return {s->events.begin() + static_cast<std::ptrdiff_t>(from), s->events.end()};
}

void Store::wait_event(const std::string& id, std::size_t have, double seconds) const {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  s->cv.wait_for(lock, std::chrono::duration<double>(seconds),
                 [&] { return s->events.size() > have || s->state != SolveState::running; });
}

Json Store::snapshot(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return snapshot_of(s->id, s->base, s->edits, s->outcome, s->outcome_revision, s->outcome_cfg);
}

}  // namespace tap::service
