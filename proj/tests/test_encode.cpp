#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "lp_reader.hpp"
#include "support.hpp"
#include "tap/encode.hpp"
#include "tap/solver.hpp"
#include "tap/verify.hpp"

using namespace tap;
using namespace tap::encode;
using tap::test::data_path;

namespace {

std::filesystem::path golden_path(const std::string& name) {
  return std::filesystem::path(TAP_TEST_DATA).parent_path() / "golden" / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

/// Compares with the stored file; TAP_UPDATE_GOLDEN=1 rewrites it instead.
void expect_golden(const std::string& name, const std::string& text) {
  const auto path = golden_path(name);
  if (std::getenv("TAP_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << text;
    return;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << path;
  EXPECT_EQ(slurp(path), text) << name << " differs from the golden file";
}

std::shared_ptr<const Instance> shared(Instance inst) { return std::make_shared<const Instance>(std::move(inst)); }

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool is_name(const std::string& w) { return std::regex_match(w, std::regex("[a-z][0-9]*(_[sct][0-9]+)*")); }

}  // namespace

TEST(Encode, GoldenFiles) {
  const auto tiny = model::build(load_instance(data_path("tiny.json")));
  const auto small = model::build(load_instance(data_path("small.json")));
  expect_golden("tiny.lp", to_lp(tiny).text);
  expect_golden("tiny.smt2", to_smtlib(tiny).text);
  expect_golden("small.lp", to_lp(small).text);
  expect_golden("small.smt2", to_smtlib(small).text);
}

TEST(Encode, Stable) {
  const auto ir = model::build(load_instance(data_path("small.json")));
  EXPECT_EQ(to_lp(ir).text, to_lp(model::build(load_instance(data_path("small.json")))).text);
  EXPECT_EQ(to_smtlib(ir).text, to_smtlib(ir).text);
}

TEST(Encode, TinyHasEq6Row) {
  const std::string text = to_lp(model::build(load_instance(data_path("tiny.json")))).text;
  EXPECT_NE(text.find("\n Eq6_c0_t0: x_s0_c0_t0 = 10\n"), std::string::npos) << text;
}

TEST(Encode, ZeroObjective) {
  InstanceSpec spec = load_instance(data_path("tiny.json")).spec();
  spec.weights = WeightConfig{0, 0, 0, 0, 0, 0, 0, PenaltyMode::indicator};
  const auto ir = model::build(Instance::from_spec(spec));
  const std::string text = to_lp(ir).text;
  EXPECT_NE(text.find("Minimize\n obj: 0 x_s0_c0_t0\n"), std::string::npos) << text;
}

TEST(Encode, NamesRoundTrip) {
  const auto ir = model::build(load_instance(data_path("small.json")));
  for (const auto& a : {to_lp(ir), to_smtlib(ir)}) {
    ASSERT_EQ(a.names.size(), ir.variables.size());
    for (std::size_t i = 0; i < a.names.size(); ++i) {
      EXPECT_EQ(a.ids.at(a.names[i]), static_cast<int>(i));
      EXPECT_EQ(a.names[a.ids.at(a.names[i])], a.names[i]);
    }
  }
}

TEST(Encode, SmtNeedsIndicatorMode) {
  InstanceSpec spec = load_instance(data_path("small.json")).spec();
  spec.weights.penalty_mode = PenaltyMode::magnitude;
  const auto ir = model::build(Instance::from_spec(spec));
  EXPECT_THROW(to_smtlib(ir), ModeError);
  EXPECT_NO_THROW(to_lp(ir));
}

TEST(Encode, SmtKeepsZeroWeightSofts) {
  const auto ir = model::build(load_instance(data_path("small.json")));
  ASSERT_EQ(ir.source->weights().soft_new, 0);
  const std::string text = to_smtlib(ir).text;
  std::size_t softs = 0, zero = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("(assert-soft", 0) != 0) continue;
    ++softs;
    if (line.find(":weight 0 ") != std::string::npos) ++zero;
  }
  EXPECT_EQ(softs, ir.soft_terms.size());
  EXPECT_EQ(zero, 3u);  // one Eq16 clause per TA
}

TEST(Encode, SmtWithoutSoftTerms) {
  model::ModelIR ir;
  ir.variables.push_back({model::VarKind::integer, 0, 3, {model::VarFamily::h, {}, 0}});
  ir.constraints.push_back({{{1, 0}}, model::Relation::ge, 1, {"Eq9", "s0", 0}});
  const std::string text = to_smtlib(ir).text;
  EXPECT_EQ(text.find("assert-soft"), std::string::npos);
  EXPECT_NE(text.find("(assert (! (>= h_s0 1) :named Eq9_s0))"), std::string::npos) << text;
}

// Every name used in a row is declared exactly once.
TEST(Encode, DeclarationsComplete) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 20; ++round) {
    tap::test::RandomSpecOptions o;
    o.mode = round % 2 ? PenaltyMode::magnitude : PenaltyMode::indicator;
    o.pins = 0.1;
    const auto ir = model::build(Instance::from_spec(tap::test::random_spec(rng, o)));

    const std::string lp = to_lp(ir).text;
    std::istringstream in(lp);
    std::string section;
    std::set<std::string> used;
    std::map<std::string, int> declared;
    for (std::string line; std::getline(in, line);) {
      if (line.empty() || line[0] == '\\') continue;
      if (line[0] != ' ') {
        section = line;
        continue;
      }
      auto ws = words(line);
      if (section == "Minimize" || section == "Subject To") {
        for (std::size_t i = 1; i < ws.size(); ++i)
          if (is_name(ws[i])) used.insert(ws[i]);
      } else if (section == "Bounds") {
        for (const auto& w : ws)
          if (is_name(w)) ++declared[w];
      } else if (section == "Binaries" || section == "Generals") {
        for (const auto& w : ws) ++declared[w + "#kind"];
      }
    }
    for (const auto& name : used) EXPECT_EQ(declared[name + "#kind"], 1) << name;
    for (const auto& [name, n] : declared) EXPECT_EQ(n, 1) << name;

    if (ir.mode != PenaltyMode::indicator) continue;
    const std::string smt = to_smtlib(ir).text;
    std::map<std::string, int> decl;
    std::set<std::string> refs;
    std::regex declare(R"(\(declare-fun ([^ ]+) \(\) Int\))");
    std::regex ref(R"([ (]([a-z][0-9]*(?:_[sct][0-9]+)*)(?=[ )]))");
    for (std::sregex_iterator it(smt.begin(), smt.end(), declare), end; it != end; ++it) ++decl[(*it)[1]];
    std::istringstream sin(smt);
    for (std::string line; std::getline(sin, line);) {
      if (line.rfind("(assert", 0) != 0) continue;
      const auto named = line.find(":named");
      const std::string body = line.substr(0, named);
      for (std::sregex_iterator it(body.begin(), body.end(), ref), end; it != end; ++it) refs.insert((*it)[1]);
    }
    for (const auto& [name, n] : decl) EXPECT_EQ(n, 1) << name;
    for (const auto& name : refs) EXPECT_EQ(decl.count(name), 1u) << name;
  }
}

// Enumerating the re-read LP gives the same optimum as enumerating the model.
TEST(Encode, LpMeansTheSameAsTheModel) {
  std::mt19937_64 rng(31);
  int compared = 0;
  for (int round = 0; round < 120 && compared < 60; ++round) {
    tap::test::RandomSpecOptions o;
    o.max_tas = 3;
    o.max_courses = 2;
    o.max_tasks = 2;
    o.max_tau = 6;
    o.mode = round % 2 ? PenaltyMode::magnitude : PenaltyMode::indicator;
    o.pins = round % 3 == 0 ? 0.2 : 0.0;
    const Instance inst = Instance::from_spec(tap::test::random_spec(rng, o));
    const auto ir = model::build(inst);
    const auto reread = tap::test::read_lp(to_lp(ir).text, inst.num_tas(), inst.num_courses());
    solver::SolveOutcome a, b;
    try {
      a = solver::brute_force(ir, 2'000'000);
      b = solver::brute_force(reread, 20'000'000);
    } catch (const solver::BudgetExceeded&) {
      continue;
    }
    ++compared;
    ASSERT_EQ(a.status, b.status) << round;
    if (a.status == solver::Status::optimal) ASSERT_EQ(a.objective, b.objective) << round;
  }
  EXPECT_GE(compared, 40);
}

TEST(Import, SolverSolutionRoundTrip) {
  for (const char* file : {"tiny.json", "small.json"}) {
    const auto ir = model::build(load_instance(data_path(file)));
    solver::SolveConfig cfg;
    cfg.time_limit = 10;
    const auto out = solver::solve(ir, cfg);
    ASSERT_TRUE(out.best);
    const std::string sol = format_solution(*out.best, {"objective " + std::to_string(out.objective)});
    for (const auto& artifact : {to_lp(ir), to_smtlib(ir)}) {
      const Assignment back = parse_solution(artifact, sol);
      EXPECT_EQ(back, *out.best);
      EXPECT_EQ(verify::check(*ir.source, back, verify::Mode::strict).total_objective, out.objective);
    }
    const auto tmp = std::filesystem::temp_directory_path() / ("tap_import_" + std::string(file) + ".sol");
    std::ofstream(tmp) << sol;
    EXPECT_EQ(import_solution(to_lp(ir), tmp), *out.best);
    std::filesystem::remove(tmp);
  }
}

TEST(Import, SmtModelOutput) {
  const auto ir = model::build(load_instance(data_path("tiny.json")));
  std::string model = "sat\n(objectives\n (penalty 0)\n)\n(\n";
  for (int t = 0; t < kTaskKinds; ++t)
    model += "  (define-fun x_s0_c0_t" + std::to_string(t) + " () Int\n    " + (t == 0 ? "10" : "0") + ")\n";
  model += "  (define-fun h_s0 () Int\n    (- 0))\n)\n";
  const Assignment a = parse_solution(to_smtlib(ir), model);
  EXPECT_EQ(a.hours(0, 0, 0), 10);
}

TEST(Import, Errors) {
  const auto ir = model::build(load_instance(data_path("tiny.json")));
  const auto artifact = to_lp(ir);
  std::string sol;
  for (int t = 1; t < kTaskKinds; ++t) sol += "x_s0_c0_t" + std::to_string(t) + " 0\n";
  try {
    parse_solution(artifact, sol);
    FAIL() << "missing variable accepted";
  } catch (const MissingVariable& e) {
    EXPECT_EQ(e.name(), "x_s0_c0_t0");
  }
  EXPECT_THROW(parse_solution(artifact, sol + "x_s0_c0_t0 2.5\n"), NonIntegerValue);
  EXPECT_THROW(parse_solution(artifact, sol + "x_s0_c0_t0 ten\n"), NonIntegerValue);
  EXPECT_EQ(parse_solution(artifact, sol + "x_s0_c0_t0 10.0000000001\n").hours(0, 0, 0), 10);
  EXPECT_THROW(parse_solution(artifact, "# from an external run\nunsat\n"), ReportedInfeasible);
}
