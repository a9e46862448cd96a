#include "tap/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tap/encode.hpp"
#include "tap/generate.hpp"
#include "tap/metrics.hpp"
#include "tap/model.hpp"
#include "tap/service.hpp"
#include "tap/solver.hpp"
#include "tap/verify.hpp"

namespace tap::cli {

namespace {

/// A failure the user caused: bad flags, unreadable or invalid files.
class UsageError : public Error {
 public:
  using Error::Error;
};

void setup_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("tap");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("TAP_LOG");
  const std::string level = env ? env : "info";
  spdlog::set_level(spdlog::level::from_str(level));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw UsageError("cannot write '" + path + "'");
}

Fraction parse_ratio(const std::string& text) {
  try {
    std::size_t used = 0;
    if (auto slash = text.find('/'); slash != std::string::npos) {
      const long long num = std::stoll(text.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(text);
      const long long den = std::stoll(text.substr(slash + 1), &used);
      if (used != text.size() - slash - 1 || den <= 0 || num < 0) throw std::invalid_argument(text);
      return Fraction::of(num, den);
    }
    const double v = std::stod(text, &used);
    if (used != text.size() || v < 0) throw std::invalid_argument(text);
    return Fraction::from_double(v);
  } catch (const std::logic_error&) {
    throw UsageError("--ratio: expected a decimal or p/q, got '" + text + "'");
  }
}

struct SolveFlags {
  double time_limit = 60;
  std::uint64_t seed = 0;
  int threads = 1;
  std::uint64_t node_limit = 0;
  bool optimal = false;
  bool tie_break = false;

  void add(CLI::App* app) {
    app->add_option("--time-limit", time_limit, "Wall-clock limit in seconds")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Search seed");
    app->add_option("--threads", threads, "Thread budget")->check(CLI::Range(1, 256));
    app->add_option("--node-limit", node_limit, "Deterministic node cap (0 = none)");
    app->add_flag("--optimal", optimal, "Require a proof of optimality (exact search at any size)");
    app->add_flag("--tie-break", tie_break, "Prefer smaller squared deviation among equal penalties");
  }

  solver::SolveConfig config() const {
    solver::SolveConfig cfg;
    cfg.time_limit = time_limit;
    cfg.seed = seed;
    cfg.thread_budget = threads;
    cfg.node_limit = node_limit;
    cfg.optimality_required = optimal;
    cfg.tie_break = tie_break;
    cfg.on_progress = [](const solver::Progress& p) { spdlog::info("{}", solver::format_progress(p)); };
    return cfg;
  }
};

solver::SolveOutcome solve_instance(const Instance& inst, const SolveFlags& flags) {
  auto shared = std::make_shared<const Instance>(inst);
  return solver::solve(model::build(shared), flags.config());
}

std::string summary(const solver::SolveOutcome& o) {
  std::ostringstream s;
  s << "status " << solver::to_string(o.status);
  if (o.best) s << " objective " << o.objective;
  s << " lower_bound " << o.lower_bound;
  char t[32];
  std::snprintf(t, sizeof t, " time %.2fs", o.stats.wall_seconds);
  s << t;
  if (!o.reason.empty()) s << " reason " << o.reason;
  return s.str();
}

service::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App app{"Teaching assistant assignment toolkit", "tap"};
  app.require_subcommand(1);
  std::string instance_path;
  auto instance_opt = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--instance", instance_path, "Instance JSON file");
    if (required) o->required();
  };

  auto* validate = app.add_subcommand("validate", "Check an instance file and print its capacity");
  instance_opt(validate, true);

  SolveFlags solve_flags;
  std::string out_path, outcome_path;
  auto* solve = app.add_subcommand("solve", "Solve an instance and write the solution file");
  instance_opt(solve, true);
  solve_flags.add(solve);
  solve->add_option("--out", out_path, "Solution file (default: stdout)");
  solve->add_option("--outcome", outcome_path, "Also write the outcome with stats and trace as JSON");

  std::string solution_path;
  bool audit = false;
  auto* verify_cmd = app.add_subcommand("verify", "Check a solution file against an instance");
  instance_opt(verify_cmd, true);
  verify_cmd->add_option("--solution", solution_path, "Solution file")->required();
  verify_cmd->add_flag("--audit", audit, "Report every violation instead of failing on the first");

  std::string manual_path, out_dir;
  auto* report = app.add_subcommand("report", "Metrics for a solution, optionally against a manual schedule");
  instance_opt(report, true);
  report->add_option("--solution", solution_path, "Solution file (default: solve now)");
  report->add_option("--against-manual", manual_path, "Manual schedule in solution-file format");
  report->add_option("--out-dir", out_dir, "Write reports, comparison and chart series here");
  SolveFlags report_flags;
  report_flags.add(report);

  std::string format;
  auto* export_cmd = app.add_subcommand("export", "Write the model as CPLEX LP or SMT-LIB v2");
  instance_opt(export_cmd, true);
  export_cmd->add_option("--format", format, "lp or smt2")->required()->check(CLI::IsMember({"lp", "smt2"}));
  export_cmd->add_option("--out", out_path, "Output file (default: stdout)");

  gen::GenerateSpec gspec;
  std::string ratio = "0.9", witness_path;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded synthetic instance");
  gen_cmd->add_option("--tas", gspec.n_tas, "Number of TAs");
  gen_cmd->add_option("--courses", gspec.n_courses, "Number of courses");
  gen_cmd->add_option("--max-tasks", gspec.max_tasks_per_course, "Task kinds per course, at most");
  gen_cmd->add_option("--ratio", ratio, "Total task hours over total target hours, decimal or p/q");
  gen_cmd->add_option("--seed", gspec.seed, "Generator seed");
  gen_cmd->add_option("--bound-year", gspec.bound_year, "Hard bound preset year");
  gen_cmd->add_option("--out", out_path, "Instance file (default: stdout)");
  gen_cmd->add_option("--witness", witness_path, "Also write the plan the tasks were cut from");

  std::string host = "127.0.0.1", data_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the session HTTP API");
  instance_opt(serve, false);
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--data-dir", data_dir, "Session snapshot directory (default: in memory only)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*validate) {
      const Instance inst = load_instance(instance_path);
      const CapacityReport cap = capacity_report(inst);
      out << "ok " << inst.label() << ": " << inst.num_tas() << " TAs, " << inst.num_courses()
          << " courses, demand " << cap.demand_hours << "h, targets " << cap.target_hours << "h, slack "
          << cap.slack << "h\n";
      if (cap.warning) spdlog::warn("task hours exceed every TA's upper window; the instance is infeasible");
      return kOk;
    }
    if (*solve) {
      const Instance inst = load_instance(instance_path);
      const solver::SolveOutcome o = solve_instance(inst, solve_flags);
      const std::string text = solver::solution_text(o);
      if (out_path.empty()) out << text;
      else write_file(out_path, text);
      if (!outcome_path.empty()) write_file(outcome_path, service::outcome_json(o).dump(2) + "\n");
      (out_path.empty() ? err : out) << summary(o) << "\n";
      return o.best ? kOk : kInfeasible;
    }
    if (*verify_cmd) {
      const Instance inst = load_instance(instance_path);
      const Assignment a = service::read_solution(inst, read_file(solution_path));
      const verify::Verdict v = verify::check(inst, a, verify::Mode::audit);
      out << verify::to_json(v).dump(2) << "\n";
      if (!audit && !v.strict_ok) {
        err << "hard violations: " << v.hard_violations.size() << "\n";
        return kInfeasible;
      }
      return kOk;
    }
    if (*report) {
      const Instance inst = load_instance(instance_path);
      std::vector<metrics::Report> reports;
      if (solution_path.empty()) {
        const solver::SolveOutcome o = solve_instance(inst, report_flags);
        if (!o.best) {
          err << summary(o) << "\n";
          return kInfeasible;
        }
        reports.push_back(metrics::build_report(inst, *o.best, "tap", std::string(solver::to_string(o.status)),
                                                o.stats.wall_seconds));
      } else {
        reports.push_back(metrics::build_report(inst, service::read_solution(inst, read_file(solution_path)),
                                                "solution"));
      }
      if (!manual_path.empty())
        reports.push_back(metrics::build_report(inst, service::read_solution(inst, read_file(manual_path)),
                                                "manual"));
      const metrics::Comparison table = metrics::compare(reports);
      out << table.text() << "\n" << table.csv();
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);
        for (const auto& r : reports) {
          write_file((dir / ("report-" + r.source + ".json")).string(), metrics::to_json(r).dump(2) + "\n");
          write_file((dir / ("scatter-" + r.source + ".csv")).string(), metrics::scatter_csv(r));
          write_file((dir / ("histogram-" + r.source + ".csv")).string(), metrics::histogram_csv(r));
        }
        write_file((dir / "comparison.csv").string(), table.csv());
        write_file((dir / "comparison.txt").string(), table.text());
      }
      return kOk;
    }
    if (*export_cmd) {
      const Instance inst = load_instance(instance_path);
      const model::ModelIR ir = model::build(inst);
      const auto art = format == "lp" ? encode::to_lp(ir) : encode::to_smtlib(ir);
      if (out_path.empty()) out << art.text;
      else write_file(out_path, art.text);
      return kOk;
    }
    if (*gen_cmd) {
      gspec.demand_to_capacity_ratio = parse_ratio(ratio);
      const auto g = gen::generate_with_witness(gspec);
      const std::string text = serialize_instance(g.instance);
      if (out_path.empty()) out << text;
      else write_file(out_path, text);
      if (!witness_path.empty()) write_file(witness_path, format_solution(g.witness, {"witness " + g.instance.label()}));
      return kOk;
    }
    if (*serve) {
      service::Store store(data_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(data_dir));
      if (!instance_path.empty()) out << "session " << store.create(load_instance(instance_path)) << "\n";
      service::Server server(store);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const int bound = port == 0 ? server.bind_any(host) : port;
      spdlog::info("listening on {}:{}", host, bound);
      out.flush();
      const bool ok = port == 0 ? bound > 0 && server.listen_after_bind() : server.listen(host, port);
      g_server = nullptr;
      if (!ok) {
        err << "error: cannot listen on " << host << ":" << port << "\n";
        return kUsage;
      }
      return kOk;
    }
  } catch (const std::bad_alloc&) {
    err << "internal error: out of memory\n";
    return kInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr); }

}  // namespace tap::cli
