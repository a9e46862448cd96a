#include <gtest/gtest.h>

#include <httplib.h>

#include <chrono>
#include <fstream>
#include <random>
#include <thread>

#include "support.hpp"
#include "tap/generate.hpp"
#include "tap/model.hpp"
#include "tap/service.hpp"
#include "tap/verify.hpp"

using namespace tap;
using namespace tap::service;

namespace {

Instance small() { return load_instance(test::data_path("small.json")); }

Edit pin_hours(std::string ta, std::string course, TaskKind task, int hours) {
  Edit e;
  e.kind = EditKind::pin_hours;
  e.ta = std::move(ta);
  e.course = std::move(course);
  e.task = task;
  e.value = hours;
  return e;
}

Edit pair_edit(EditKind kind, std::string ta, std::string course, int value = 1) {
  Edit e;
  e.kind = kind;
  e.ta = std::move(ta);
  e.course = std::move(course);
  e.value = value;
  return e;
}

Edit field_edit(EditKind kind, std::string field, int value) {
  Edit e;
  e.kind = kind;
  e.field = std::move(field);
  e.value = value;
  return e;
}

solver::SolveConfig exact_cfg() {
  solver::SolveConfig cfg;
  cfg.time_limit = 30;
  cfg.log_interval = 0;
  return cfg;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tap-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

int cell_hours(const Instance& inst, const Assignment& a, const std::string& ta, const std::string& course,
               TaskKind t) {
  return a.hours(*inst.ta_index(ta), *inst.course_index(course), static_cast<int>(t));
}

}  // namespace

TEST(Edit, JsonRoundTrip) {
  Edit note = pair_edit(EditKind::forbid, "anna", "biology", 0);
  note.note = "on leave";
  for (const Edit& e : {pin_hours("anna", "algebra", TaskKind::exercise, 4),
                        pair_edit(EditKind::pin_course, "ben", "biology", 0), note,
                        field_edit(EditKind::set_bound, "hard_dev", 20),
                        field_edit(EditKind::set_weight, "Eq18", 9)}) {
    EXPECT_EQ(edit_from_json(to_json(e)), e) << to_json(e).dump();
  }
}

TEST(Edit, MalformedDocuments) {
  EXPECT_THROW(edit_from_json(Json::array()), ParseError);
  EXPECT_THROW(edit_from_json(Json{{"kind", "teleport"}}), ParseError);
  EXPECT_THROW(edit_from_json(Json{{"kind", "pin_hours"}, {"ta", "anna"}, {"course", "algebra"}}), ParseError);
  EXPECT_THROW(edit_from_json(Json{{"kind", "pin_hours"}, {"ta", "anna"}, {"course", "algebra"},
                                   {"task", "juggling"}, {"hours", 3}}),
               ParseError);
  EXPECT_THROW(edit_from_json(Json{{"kind", "set_bound"}, {"field", "hard_dev"}, {"value", "ten"}}), ParseError);
}

TEST(Edit, ApplyCompilesToInstance) {
  const Instance base = small();
  const Instance edited = apply_edits(
      base, {pin_hours("anna", "algebra", TaskKind::exercise, 4), pair_edit(EditKind::pin_course, "ben", "biology"),
             pair_edit(EditKind::forbid, "cleo", "biology"), field_edit(EditKind::set_bound, "hard_dev", 15),
             field_edit(EditKind::set_weight, "Eq18", 9), field_edit(EditKind::set_weight, "pref_negative", 2)});
  EXPECT_EQ(edited.pinned_hours(0, 0, static_cast<int>(TaskKind::exercise)), 4);
  EXPECT_TRUE(edited.pinned_course(1, 1));
  EXPECT_TRUE(edited.forbidden(2, 1));
  EXPECT_EQ(edited.bounds().hard_dev, 15);
  EXPECT_EQ(edited.weights().soft_courses, 9);
  EXPECT_EQ(edited.weights().pref_negative, 2);
  // The base stays untouched.
  EXPECT_FALSE(base.forbidden(2, 1));
  EXPECT_EQ(base.bounds().hard_dev, 12);
}

TEST(Edit, LaterPinReplacesEarlier) {
  const Instance edited = apply_edits(small(), {pin_hours("anna", "algebra", TaskKind::exercise, 4),
                                                pin_hours("anna", "algebra", TaskKind::exercise, 6)});
  EXPECT_EQ(edited.pinned_hours(0, 0, static_cast<int>(TaskKind::exercise)), 6);
  EXPECT_EQ(edited.spec().pins.size(), 1u);
}

TEST(Edit, ForbidCanBeLifted) {
  const Instance edited = apply_edits(small(), {pair_edit(EditKind::forbid, "ben", "algebra"),
                                                pair_edit(EditKind::forbid, "ben", "algebra", 0)});
  EXPECT_FALSE(edited.forbidden(1, 0));
}

TEST(Edit, BadEdits) {
  const Instance base = small();
  EXPECT_THROW(apply_edits(base, {pin_hours("anna", "algebra", TaskKind::exercise, 9)}), BadEdit);  // tau 8
  EXPECT_THROW(apply_edits(base, {pin_hours("anna", "algebra", TaskKind::exercise, -1)}), BadEdit);
  EXPECT_THROW(apply_edits(base, {pin_hours("zoe", "algebra", TaskKind::exercise, 1)}), BadEdit);
  EXPECT_THROW(apply_edits(base, {pair_edit(EditKind::pin_course, "anna", "chemistry")}), BadEdit);
  EXPECT_THROW(apply_edits(base, {field_edit(EditKind::set_bound, "warp", 3)}), BadEdit);
  EXPECT_THROW(apply_edits(base, {field_edit(EditKind::set_bound, "hard_dev", -3)}), BadEdit);
  EXPECT_THROW(apply_edits(base, {field_edit(EditKind::set_weight, "Eq18", -1)}), BadEdit);
  EXPECT_THROW(apply_edits(base, {field_edit(EditKind::set_weight, "penalty_mode", 1)}), BadEdit);
  try {
    apply_edits(base, {pair_edit(EditKind::forbid, "anna", "algebra"),
                       pin_hours("anna", "algebra", TaskKind::exercise, 90)});
    FAIL();
  } catch (const BadEdit& e) {
    EXPECT_NE(std::string(e.what()).find("edit 1 (pin_hours)"), std::string::npos) << e.what();
  }
}

TEST(Config, JsonRoundTrip) {
  solver::SolveConfig cfg;
  cfg.time_limit = 12.5;
  cfg.seed = 7;
  cfg.thread_budget = 2;
  cfg.node_limit = 900;
  cfg.tie_break = true;
  cfg.optimality_required = true;
  const solver::SolveConfig back = config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
  EXPECT_EQ(config_from_json(Json::object()).time_limit, solver::SolveConfig{}.time_limit);
  EXPECT_THROW(config_from_json(Json{{"thread_budget", 0}}), ParseError);
  EXPECT_THROW(config_from_json(Json{{"time_limit", -1}}), ParseError);
  EXPECT_THROW(config_from_json(Json{{"seed", "x"}}), ParseError);
}

TEST(Store, CreateEditAndStale) {
  Store store;
  const std::string a = store.create(small());
  const std::string b = store.create(small());
  EXPECT_NE(a, b);
  EXPECT_EQ(store.describe(a)["revision"], 0);
  EXPECT_THROW(store.report(a, std::nullopt), Stale);
  EXPECT_THROW(store.describe("nope"), NotFound);

  store.resolve(a, exact_cfg());
  EXPECT_FALSE(store.outcome(a)["stale"].get<bool>());
  EXPECT_NO_THROW(store.report(a, std::nullopt));

  EXPECT_EQ(store.apply_edit(a, pair_edit(EditKind::forbid, "ben", "biology")), 1);
  EXPECT_TRUE(store.outcome(a)["stale"].get<bool>());
  EXPECT_EQ(store.outcome(a)["outcome_revision"], 0);
  EXPECT_THROW(store.report(a, std::nullopt), Stale);
  // A rejected edit leaves the revision alone.
  EXPECT_THROW(store.apply_edit(a, pin_hours("anna", "algebra", TaskKind::exercise, 99)), BadEdit);
  EXPECT_EQ(store.describe(a)["revision"], 1);
  // Sessions do not interfere.
  EXPECT_EQ(store.describe(b)["revision"], 0);
  EXPECT_TRUE(store.describe(b)["stale"].get<bool>());
}

TEST(Store, ForbidThenSolveLeavesPairEmpty) {
  Store store;
  const Instance base = small();
  const std::string id = store.create(base);
  const auto before = store.resolve(id, exact_cfg());
  ASSERT_TRUE(before.best);
  // Forbid a pair the first solution used.
  int s0 = -1, c0 = -1;
  for (int s = 0; s < base.num_tas() && s0 < 0; ++s)
    for (int c = 0; c < base.num_courses(); ++c)
      if (before.best->teaches_course(s, c) && !base.pinned_course(s, c)) {
        s0 = s, c0 = c;
        break;
      }
  ASSERT_GE(s0, 0);
  store.apply_edit(id, pair_edit(EditKind::forbid, base.ta_id(s0), base.course_id(c0)));
  const auto after = store.resolve(id, exact_cfg());
  if (after.best) {
    for (int t = 0; t < kTaskKinds; ++t) EXPECT_EQ(after.best->hours(s0, c0, t), 0);
  } else {
    EXPECT_EQ(after.status, solver::Status::infeasible);
  }
}

TEST(Store, PinsAppearVerbatimInEverySolution) {
  Store store;
  const Instance base = small();
  const std::string id = store.create(base);
  store.apply_edit(id, pin_hours("cleo", "algebra", TaskKind::exercise, 3));
  auto o1 = store.resolve(id, exact_cfg());
  ASSERT_TRUE(o1.best);
  EXPECT_EQ(cell_hours(base, *o1.best, "cleo", "algebra", TaskKind::exercise), 3);

  store.apply_edit(id, pair_edit(EditKind::pin_course, "ben", "biology"));
  auto o2 = store.resolve(id, exact_cfg());
  ASSERT_TRUE(o2.best);
  EXPECT_EQ(cell_hours(base, *o2.best, "cleo", "algebra", TaskKind::exercise), 3);
  EXPECT_TRUE(o2.best->teaches_course(1, 1));

  store.apply_edit(id, field_edit(EditKind::set_weight, "Eq14", 0));
  auto o3 = store.resolve(id, exact_cfg());
  ASSERT_TRUE(o3.best);
  EXPECT_EQ(cell_hours(base, *o3.best, "cleo", "algebra", TaskKind::exercise), 3);
  EXPECT_TRUE(o3.best->teaches_course(1, 1));
  EXPECT_TRUE(verify::check(store.current_instance(id), *o3.best, verify::Mode::audit).strict_ok);
}

TEST(Store, ContradictoryAdminPinsAreInfeasible) {
  Store store;
  const std::string id = store.create(small());
  store.apply_edit(id, pin_hours("anna", "algebra", TaskKind::admin, 2));
  store.apply_edit(id, pin_hours("ben", "algebra", TaskKind::admin, 2));
  const auto o = store.resolve(id, exact_cfg());
  EXPECT_EQ(o.status, solver::Status::infeasible);
  EXPECT_FALSE(o.best);
  EXPECT_NE(o.reason.find("Eq13"), std::string::npos) << o.reason;
  EXPECT_THROW(store.report(id, std::nullopt), Stale);
}

TEST(Store, NoEditsMatchesDirectSolve) {
  Store store;
  const Instance base = small();
  const std::string id = store.create(base);
  const auto via_store = store.resolve(id, exact_cfg());
  const auto direct = solver::solve(model::build(std::make_shared<const Instance>(base)), exact_cfg());
  EXPECT_EQ(outcome_record(via_store).dump(), outcome_record(direct).dump());
}

TEST(Store, ReportAgainstManual) {
  Store store;
  const Instance base = small();
  const std::string id = store.create(base);
  store.resolve(id, exact_cfg());
  Assignment manual = Assignment::empty_for(base);
  manual.set_hours(0, 0, 0, 4);
  manual.set_hours(0, 0, 1, 4);
  manual.set_hours(2, 0, 1, 4);
  manual.set_hours(1, 1, 0, 3);
  manual.set_hours(1, 1, 3, 6);
  const Json r = store.report(id, manual);
  ASSERT_EQ(r["reports"].size(), 2u);
  EXPECT_EQ(r["reports"][0]["source"], "tap");
  EXPECT_EQ(r["reports"][1]["source"], "manual");
  EXPECT_EQ(r["verdicts"].size(), 2u);
  const std::string text = r["comparison"]["text"].get<std::string>();
  EXPECT_NE(text.find("manual  -"), std::string::npos) << text;
  EXPECT_EQ(r["reports"][0]["scatter"].size(), 3u);
}

TEST(Store, ReplayReproducesStoredOutcome) {
  std::mt19937_64 rng(404);
  int solved = 0;
  for (int round = 0; round < 12; ++round) {
    test::RandomSpecOptions o;
    o.max_tas = 3;
    o.max_courses = 3;
    Instance inst = Instance::from_spec(test::random_spec(rng, o));
    Store store;
    const std::string id = store.create(inst);
    // A few random edits, skipping any the instance rejects.
    for (int i = 0; i < 3; ++i) {
      const int s = test::uniform(rng, 0, inst.num_tas() - 1), c = test::uniform(rng, 0, inst.num_courses() - 1);
      Edit e = test::chance(rng, 0.5)
                   ? pair_edit(EditKind::forbid, inst.ta_id(s), inst.course_id(c), test::chance(rng, 0.5))
                   : field_edit(EditKind::set_weight, "Eq18", test::uniform(rng, 0, 9));
      try {
        store.apply_edit(id, e);
      } catch (const BadEdit&) {
      }
    }
    solver::SolveConfig cfg = exact_cfg();
    cfg.seed = static_cast<std::uint64_t>(round);
    store.resolve(id, cfg);
    const Json snap = store.snapshot(id);
    EXPECT_EQ(replay(snap).dump(), snap["outcome"]["record"].dump()) << "round " << round;
    solved += snap["outcome"]["record"]["objective"].is_null() ? 0 : 1;
  }
  EXPECT_GT(solved, 0);
}

TEST(Store, SnapshotsSurviveRestart) {
  const auto dir = fresh_dir("restart");
  std::string id;
  Json before;
  {
    Store store(dir);
    id = store.create(small());
    store.apply_edit(id, pin_hours("cleo", "algebra", TaskKind::exercise, 3));
    store.resolve(id, exact_cfg());
    store.apply_edit(id, field_edit(EditKind::set_bound, "hard_dev", 14));
    before = store.snapshot(id);
  }
  ASSERT_TRUE(std::filesystem::exists(dir / (id + ".json")));
  Store again(dir);
  EXPECT_EQ(again.snapshot(id).dump(), before.dump());
  EXPECT_EQ(again.describe(id)["revision"], 2);
  EXPECT_TRUE(again.outcome(id)["stale"].get<bool>());
  EXPECT_EQ(again.outcome(id)["outcome"]["solution"], before["outcome"]["record"]["solution"]);
  // The restored session keeps working.
  again.resolve(id, exact_cfg());
  EXPECT_NO_THROW(again.report(id, std::nullopt));
  std::filesystem::remove_all(dir);
}

TEST(Store, BusyWhileSolvingAndCancel) {
  gen::GenerateSpec g;
  g.seed = 3;
  Store store;
  const std::string id = store.create(gen::generate(g));
  solver::SolveConfig cfg;
  cfg.time_limit = 60;
  cfg.log_interval = 0.05;
  store.start_solve(id, cfg);
  EXPECT_THROW(store.start_solve(id, cfg), Busy);
  EXPECT_EQ(store.describe(id)["state"], "running");
  // Edits are accepted while the solve runs; its outcome is then stale.
  EXPECT_EQ(store.apply_edit(id, field_edit(EditKind::set_weight, "Eq18", 6)), 1);
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_TRUE(store.cancel(id));
  store.wait(id);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 5.0);
  EXPECT_FALSE(store.cancel(id));
  const Json o = store.outcome(id);
  EXPECT_EQ(o["outcome_revision"], 0);
  EXPECT_TRUE(o["stale"].get<bool>());
  bool finished = false;
  EXPECT_FALSE(store.events(id, 0, finished).empty());
  EXPECT_TRUE(finished);
}

// Raising one soft weight never raises that family's violation count at the
// optimum, here driven through session edits.
TEST(Store, RaisingWeightNeverAddsViolations) {
  std::mt19937_64 rng(77);
  int compared = 0;
  for (int round = 0; round < 20; ++round) {
    Instance inst = Instance::from_spec(test::random_spec(rng, 3, 2, 2, 8));
    Store store;
    const std::string id = store.create(inst);
    const auto before = store.resolve(id, exact_cfg());
    if (!before.best) continue;
    const int raised = inst.weights().soft_courses + 1 + test::uniform(rng, 0, 20);
    store.apply_edit(id, field_edit(EditKind::set_weight, "soft_courses", raised));
    const auto after = store.resolve(id, exact_cfg());
    ASSERT_TRUE(after.best);
    const Instance edited = store.current_instance(id);
    EXPECT_LE(verify::soft_violations(edited, *after.best).at("Eq18"),
              verify::soft_violations(inst, *before.best).at("Eq18"))
        << "round " << round;
    ++compared;
  }
  EXPECT_GE(compared, 5);
}

// ---- HTTP ------------------------------------------------------------------

class Http : public ::testing::Test {
 protected:
  void SetUp() override {
    server_ = std::make_unique<Server>(store_);
    port_ = server_->bind_any("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(30, 0);
  }
  void TearDown() override {
    server_->stop();
    if (thread_.joinable()) thread_.join();
  }

  Json post(const std::string& path, const std::string& body, int expect) {
    auto res = client_->Post(path, body, "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << ": " << res->body;
    return Json::parse(res->body);
  }
  Json get(const std::string& path, int expect) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << ": " << res->body;
    return Json::parse(res->body);
  }

  Store store_;
  std::unique_ptr<Server> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(Http, SessionWorkflow) {
  const std::string doc = serialize_instance(small());
  const Json created = post("/sessions", doc, 201);
  const std::string id = created["id"];
  EXPECT_EQ(created["revision"], 0);
  EXPECT_NE(post("/sessions", doc, 201)["id"], id);
  EXPECT_EQ(get("/sessions", 200)["sessions"].size(), 2u);

  EXPECT_EQ(get("/sessions/" + id + "/outcome", 200)["state"], "idle");
  EXPECT_EQ(get("/sessions/" + id + "/report", 409)["error"], "stale");

  const Json pin{{"kind", "pin_hours"}, {"ta", "cleo"}, {"course", "algebra"}, {"task", "exercise"}, {"hours", 3}};
  EXPECT_EQ(post("/sessions/" + id + "/edits", pin.dump(), 200)["revision"], 1);
  Json bad = pin;
  bad["hours"] = 99;
  EXPECT_EQ(post("/sessions/" + id + "/edits", bad.dump(), 400)["error"], "bad_edit");

  const Json solved = post("/sessions/" + id + "/solve?wait=1", R"({"time_limit": 20})", 200);
  EXPECT_EQ(solved["revision"], 1);
  EXPECT_FALSE(solved["stale"].get<bool>());
  EXPECT_EQ(solved["outcome"]["status"], "optimal");
  const Instance inst = store_.current_instance(id);
  const Assignment a = read_solution(inst, solved["outcome"]["solution"].get<std::string>());
  EXPECT_EQ(cell_hours(inst, a, "cleo", "algebra", TaskKind::exercise), 3);

  const Json report = get("/sessions/" + id + "/report", 200);
  EXPECT_EQ(report["reports"].size(), 1u);
  const Json vs = post("/sessions/" + id + "/report", solved["outcome"]["solution"].get<std::string>(), 200);
  EXPECT_EQ(vs["reports"].size(), 2u);
  EXPECT_EQ(vs["reports"][0]["rmse"], vs["reports"][1]["rmse"]);

  // The event stream of a finished solve replays its records and ends.
  auto res = client_->Get("/sessions/" + id + "/events");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(res->body.find("event: progress"), std::string::npos);
  EXPECT_NE(res->body.find("event: done"), std::string::npos);
  EXPECT_EQ(post("/sessions/" + id + "/cancel", "", 200)["cancelled"], false);
}

TEST_F(Http, Errors) {
  EXPECT_EQ(post("/sessions", "{not json", 400)["error"], "parse");
  Json doc = Json::parse(serialize_instance(small()));
  doc["tas"][0]["year"] = 9;
  EXPECT_EQ(post("/sessions", doc.dump(), 400)["error"], "validation");
  EXPECT_EQ(get("/sessions/missing/outcome", 404)["error"], "not_found");
  EXPECT_EQ(post("/sessions/missing/edits", R"({"kind": "forbid", "ta": "anna", "course": "algebra"})", 404)["error"],
            "not_found");
  const std::string id = post("/sessions", serialize_instance(small()), 201)["id"];
  EXPECT_EQ(post("/sessions/" + id + "/edits", R"({"kind": "warp"})", 400)["error"], "parse");
  EXPECT_EQ(post("/sessions/" + id + "/solve", R"({"thread_budget": 0})", 400)["error"], "parse");
}

TEST_F(Http, BusyAndStream) {
  gen::GenerateSpec g;
  g.seed = 4;
  const std::string id = post("/sessions", serialize_instance(gen::generate(g)), 201)["id"];
  EXPECT_EQ(post("/sessions/" + id + "/solve", R"({"time_limit": 1.5, "log_interval": 0.1})", 202)["state"],
            "running");
  const Json busy = post("/sessions/" + id + "/solve", "{}", 409);
  EXPECT_EQ(busy["error"], "busy");
  EXPECT_TRUE(busy.contains("progress"));
  // The stream follows the running solve to its end.
  auto res = client_->Get("/sessions/" + id + "/events");
  ASSERT_TRUE(res);
  EXPECT_NE(res->body.find("event: done"), std::string::npos);
  EXPECT_EQ(get("/sessions/" + id + "/outcome", 200)["state"], "done");
}
