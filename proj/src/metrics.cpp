#include "tap/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tap/verify.hpp"

namespace tap::metrics {

double rmse(const std::vector<std::int64_t>& targets, const std::vector<std::int64_t>& assigned) {
  if (targets.size() != assigned.size()) {
    throw LengthMismatch(std::to_string(targets.size()) + " targets, " + std::to_string(assigned.size()) +
                         " assigned");
  }
  if (targets.empty()) throw EmptyInput("rmse of no values");
  // Squares stay exact in integers; only the final mean and root are inexact.
  long double sum = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::int64_t d = assigned[i] - targets[i];
    sum += static_cast<long double>(d) * static_cast<long double>(d);
  }
  return static_cast<double>(std::sqrt(sum / static_cast<long double>(targets.size())));
}

Report build_report(const Instance& inst, const Assignment& a, std::string source, std::string status,
                    std::optional<double> seconds) {
  const verify::Verdict verdict = verify::check(inst, a, verify::Mode::audit);
  Report r;
  r.label = inst.label();
  r.source = std::move(source);
  r.status = std::move(status);
  r.seconds = seconds;
  r.objective = verdict.total_objective;
  r.strict_ok = verdict.strict_ok;
  r.hard_violations = static_cast<int>(verdict.hard_violations.size());
  std::vector<std::int64_t> targets, assigned;
  for (int s = 0; s < inst.num_tas(); ++s) {
    std::int64_t h = 0;
    int courses = 0, fresh = 0;
    for (int c = 0; c < inst.num_courses(); ++c) {
      int on = 0;
      for (int t = 0; t < kTaskKinds; ++t) on += a.hours(s, c, t);
      h += on;
      if (on > 0) {
        ++courses;
        if (!inst.taught_last_year(s, c)) ++fresh;
      }
    }
    r.scatter.push_back({inst.ta_id(s), inst.target(s), h});
    r.course_histogram[courses].push_back(inst.ta_id(s));
    r.new_course_histogram[fresh].push_back(inst.ta_id(s));
    targets.push_back(inst.target(s));
    assigned.push_back(h);
  }
  r.rmse = targets.empty() ? 0.0 : rmse(targets, assigned);
  return r;
}

Comparison compare(const std::vector<Report>& reports) {
  if (reports.empty()) throw EmptyInput("nothing to compare");
  Comparison out;
  out.label = reports.front().label;
  for (const auto& r : reports) {
    if (r.label != out.label) throw LabelMismatch("report for '" + r.label + "' next to '" + out.label + "'");
  }
  out.rows = reports;
  return out;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string time_cell(const Report& r) { return r.seconds ? fixed(*r.seconds, 2) : "-"; }
std::string status_cell(const Report& r) { return r.status.empty() ? "-" : r.status; }

}  // namespace

std::string Comparison::csv() const {
  std::ostringstream out;
  out << "source,status,rmse,time,objective,hard_violations\n";
  for (const auto& r : rows) {
    out << r.source << ',' << status_cell(r) << ',' << fixed(r.rmse, 2) << ',' << time_cell(r) << ','
        << r.objective << ',' << r.hard_violations << '\n';
  }
  return out.str();
}

std::string Comparison::text() const {
  std::vector<std::vector<std::string>> cells = {{"source", "status", "RMSE", "time", "objective", "hard"}};
  for (const auto& r : rows) {
    cells.push_back({r.source, status_cell(r), fixed(r.rmse, 2), time_cell(r), std::to_string(r.objective),
                     std::to_string(r.hard_violations)});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream out;
  out << label << '\n';
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << "  ";
      // Text left, numbers right.
      const bool left = i < 2;
      const std::string pad(width[i] - row[i].size(), ' ');
      out << (left ? row[i] + pad : pad + row[i]);
    }
    out << '\n';
  }
  return out.str();
}

Json to_json(const Report& r) {
  Json doc;
  doc["label"] = r.label;
  doc["source"] = r.source;
  doc["status"] = r.status;
  doc["seconds"] = r.seconds ? Json(*r.seconds) : Json(nullptr);
  doc["rmse"] = r.rmse;
  doc["objective"] = r.objective;
  doc["strict_ok"] = r.strict_ok;
  doc["hard_violations"] = r.hard_violations;
  doc["scatter"] = Json::array();
  for (const auto& p : r.scatter) doc["scatter"].push_back({{"ta", p.ta}, {"target", p.target}, {"assigned", p.assigned}});
  auto hist = [](const std::map<int, std::vector<std::string>>& h) {
    Json out = Json::object();
    for (const auto& [k, tas] : h) out[std::to_string(k)] = tas;
    return out;
  };
  doc["course_histogram"] = hist(r.course_histogram);
  doc["new_course_histogram"] = hist(r.new_course_histogram);
  return doc;
}

std::string scatter_csv(const Report& r) {
  std::ostringstream out;
  out << "ta,target,assigned\n";
  for (const auto& p : r.scatter) out << p.ta << ',' << p.target << ',' << p.assigned << '\n';
  return out.str();
}

std::string histogram_csv(const Report& r) {
  std::ostringstream out;
  out << "kind,count,num_tas\n";
  auto emit = [&](const char* kind, const std::map<int, std::vector<std::string>>& h) {
    for (const auto& [k, tas] : h) {
      out << kind << ',' << k << ',' << tas.size() << '\n';
    }
  };
  emit("courses", r.course_histogram);
  emit("new_courses", r.new_course_histogram);
  return out.str();
}

}  // namespace tap::metrics
