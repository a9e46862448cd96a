#include "tap/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace tap {

namespace {

constexpr std::array<std::string_view, kTaskKinds> kTaskNames = {
    "admin",
    "exercise",
    "problem_solving",
    "lab",
    "computer",
    "assignment_supervision",
    "assignment_evaluation",
    "project_supervision",
    "exam_evaluation",
    "other",
};

std::string at(std::string_view base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

const Json& member(const Json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + ": missing key '" + key + "'");
  return *it;
}

int as_int(const Json& v, const std::string& path) {
  if (v.is_number_integer()) {
    auto x = v.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) throw ParseError(path + ": integer out of range");
    return static_cast<int>(x);
  }
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 2e9) return static_cast<int>(d);
  }
  throw ParseError(path + ": expected integer");
}

int int_member(const Json& obj, const char* key, const std::string& path) {
  return as_int(member(obj, key, path), path + "." + key);
}

std::optional<int> opt_int(const Json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return as_int(*it, path + "." + key);
}

bool opt_bool(const Json& obj, const char* key, const std::string& path, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) throw ParseError(path + "." + key + ": expected boolean");
  return it->get<bool>();
}

std::string str_member(const Json& obj, const char* key, const std::string& path) {
  const Json& v = member(obj, key, path);
  if (!v.is_string()) throw ParseError(path + "." + key + ": expected string");
  return v.get<std::string>();
}

const Json& array_member(const Json& obj, const char* key, const std::string& path) {
  const Json& v = member(obj, key, path);
  if (!v.is_array()) throw ParseError(path + "." + key + ": expected array");
  return v;
}

void require_object(const Json& v, const std::string& path) {
  if (!v.is_object()) throw ParseError(path + ": expected object");
}

TaskKind parse_kind(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path + ": expected task kind string");
  auto kind = task_kind_from_string(v.get<std::string>());
  if (!kind) throw ValidationError(path, "unknown task kind '" + v.get<std::string>() + "'");
  return *kind;
}

struct HardYearRow {
  int year, dev, courses, tas, new_courses;
};

constexpr std::array<HardYearRow, 5> kYearTable = {{
    {2022, 100, 2, 8, 1},
    {2023, 120, 3, 8, 1},
    {2024, 150, 3, 8, 1},
    {2025, 150, 2, 8, 1},
    {2026, 160, 3, 8, 1},
}};

void validate_bounds(const BoundConfig& b) {
  const std::pair<const char*, int> fields[] = {
      {"hard_dev", b.hard_dev},
      {"soft_dev", b.soft_dev},
      {"hard_new_courses", b.hard_new_courses},
      {"soft_new_courses", b.soft_new_courses},
      {"hard_courses_per_ta", b.hard_courses_per_ta},
      {"soft_courses_per_ta", b.soft_courses_per_ta},
      {"hard_tas_per_course", b.hard_tas_per_course},
      {"soft_extra_tas_per_task", b.soft_extra_tas_per_task},
      {"min_task_hours", b.min_task_hours},
      {"annual_full_load", b.annual_full_load},
  };
  for (const auto& [name, value] : fields) {
    if (value < 0) throw ValidationError(std::string("bounds.") + name, "must be >= 0");
  }
  if (b.annual_full_load <= 0) throw ValidationError("bounds.annual_full_load", "must be > 0");
  if (b.soft_dev > b.hard_dev) throw ValidationError("bounds.soft_dev", "must not exceed hard_dev");
  if (b.soft_new_courses > b.hard_new_courses)
    throw ValidationError("bounds.soft_new_courses", "must not exceed hard_new_courses");
  if (b.soft_courses_per_ta > b.hard_courses_per_ta)
    throw ValidationError("bounds.soft_courses_per_ta", "must not exceed hard_courses_per_ta");
}

void validate_weights(const WeightConfig& w) {
  const std::pair<const char*, int> fields[] = {
      {"target_year5", w.target_year5},   {"soft_dev", w.soft_dev},
      {"soft_new", w.soft_new},           {"soft_staff", w.soft_staff},
      {"soft_courses", w.soft_courses},   {"pref_positive", w.pref_positive},
      {"pref_negative", w.pref_negative},
  };
  for (const auto& [name, value] : fields) {
    if (value < 0) throw ValidationError(std::string("weights.") + name, "must be >= 0");
  }
}

}  // namespace

std::string_view to_string(TaskKind kind) { return kTaskNames[static_cast<int>(kind)]; }

std::optional<TaskKind> task_kind_from_string(std::string_view name) {
  for (int i = 0; i < kTaskKinds; ++i) {
    if (kTaskNames[i] == name) return static_cast<TaskKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(PenaltyMode mode) {
  return mode == PenaltyMode::indicator ? "indicator" : "magnitude";
}

std::optional<PenaltyMode> penalty_mode_from_string(std::string_view name) {
  if (name == "indicator") return PenaltyMode::indicator;
  if (name == "magnitude") return PenaltyMode::magnitude;
  return std::nullopt;
}

Fraction Fraction::of(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ValidationError("", "fraction with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g == 0) g = 1;
  return Fraction{num / g, den / g};
}

Fraction Fraction::from_double(double value) {
  return of(std::llround(value * 1e6), 1000000);
}

BoundConfig BoundConfig::for_year(int year) {
  for (const auto& row : kYearTable) {
    if (row.year != year) continue;
    BoundConfig b;
    b.hard_dev = row.dev;
    b.soft_dev = row.dev / 2;
    b.hard_courses_per_ta = row.courses;
    b.soft_courses_per_ta = row.courses - 1;
    b.hard_tas_per_course = row.tas;
    b.soft_extra_tas_per_task = 0;
    b.hard_new_courses = row.new_courses;
    b.soft_new_courses = 0;
    b.min_task_hours = 5;
    b.annual_full_load = 350;
    return b;
  }
  throw ValidationError("parameter_year", "no parameter table for year " + std::to_string(year));
}

int compute_target(Fraction employment_fraction, int carryover, int annual_full_load) {
  // floor(p*L/q + 1/2) == floor((2pL + q) / 2q) for non-negative p.
  const std::int64_t p = employment_fraction.num;
  const std::int64_t q = employment_fraction.den;
  const std::int64_t scaled = (2 * p * annual_full_load + q) / (2 * q);
  return static_cast<int>(scaled) + carryover;
}

std::optional<int> Instance::ta_index(std::string_view id) const {
  for (int s = 0; s < num_tas(); ++s) {
    if (spec_.tas[s].id == id) return s;
  }
  return std::nullopt;
}

std::optional<int> Instance::course_index(std::string_view id) const {
  for (int c = 0; c < num_courses(); ++c) {
    if (spec_.courses[c].id == id) return c;
  }
  return std::nullopt;
}

std::optional<int> Instance::pinned_hours(int s, int c, int t) const {
  int v = pinned_hours_[pair(s, c) * kTaskKinds + t];
  if (v < 0) return std::nullopt;
  return v;
}

Instance Instance::from_spec(InstanceSpec spec) {
  Instance inst;
  validate_bounds(spec.bounds);
  validate_weights(spec.weights);

  std::unordered_map<std::string, int> ta_ids;
  for (std::size_t s = 0; s < spec.tas.size(); ++s) {
    auto& ta = spec.tas[s];
    const std::string path = at("tas", s);
    if (ta.id.empty()) throw ValidationError(path + ".id", "must not be empty");
    if (!ta_ids.emplace(ta.id, static_cast<int>(s)).second)
      throw ValidationError(path + ".id", "duplicate TA id '" + ta.id + "'");
    if (ta.year < 1 || ta.year > 5) throw ValidationError(path + ".year", "year out of [1,5]");
    if (ta.employment_fraction.den <= 0 || ta.employment_fraction.num < 0 ||
        ta.employment_fraction.num > ta.employment_fraction.den)
      throw ValidationError(path + ".employment_fraction", "employment_fraction out of [0,1]");
    ta.target_hours =
        compute_target(ta.employment_fraction, ta.carryover_hours, spec.bounds.annual_full_load);
  }

  const std::size_t num_courses = spec.courses.size();
  std::unordered_map<std::string, int> course_ids;
  inst.hours_.assign(num_courses * kTaskKinds, 0);
  inst.required_.assign(num_courses * kTaskKinds, 0);
  for (std::size_t c = 0; c < num_courses; ++c) {
    const auto& course = spec.courses[c];
    const std::string path = at("courses", c);
    if (course.id.empty()) throw ValidationError(path + ".id", "must not be empty");
    if (!course_ids.emplace(course.id, static_cast<int>(c)).second)
      throw ValidationError(path + ".id", "duplicate course id '" + course.id + "'");
    std::array<bool, kTaskKinds> seen{};
    for (std::size_t k = 0; k < course.tasks.size(); ++k) {
      const auto& task = course.tasks[k];
      const std::string tpath = at(path + ".tasks", k);
      const int t = static_cast<int>(task.kind);
      if (seen[t]) throw ValidationError(tpath + ".kind", "duplicate task kind");
      seen[t] = true;
      if (task.total_hours < 0) throw ValidationError(tpath + ".total_hours", "must be >= 0");
      if (task.required_tas < 0) throw ValidationError(tpath + ".required_tas", "must be >= 0");
      if (task.total_hours == 0 && task.required_tas > 0)
        throw ValidationError(tpath + ".required_tas", "absent task (0 hours) cannot require TAs");
      inst.hours_[c * kTaskKinds + t] = task.total_hours;
      inst.required_[c * kTaskKinds + t] = task.required_tas;
    }
    if (inst.hours_[c * kTaskKinds] <= 0)
      throw ValidationError(path + ".tasks", "course needs an admin task with positive hours");
  }

  const std::size_t num_pairs = spec.tas.size() * num_courses;
  inst.preference_.assign(num_pairs, 0);
  inst.forbidden_.assign(num_pairs, 0);
  inst.kappa_.assign(num_pairs, 0);
  std::set<std::pair<int, int>> seen_pairs;
  for (std::size_t i = 0; i < spec.pairs.size(); ++i) {
    const auto& p = spec.pairs[i];
    const std::string path = at("pairs", i);
    auto s = ta_ids.find(p.ta_id);
    if (s == ta_ids.end()) throw ValidationError(path + ".ta", "unknown TA '" + p.ta_id + "'");
    auto c = course_ids.find(p.course_id);
    if (c == course_ids.end())
      throw ValidationError(path + ".course", "unknown course '" + p.course_id + "'");
    if (!seen_pairs.emplace(s->second, c->second).second)
      throw ValidationError(path, "duplicate pair entry");
    if (p.preference < -1 || p.preference > 1)
      throw ValidationError(path + ".preference", "preference must be in {-1,0,1}");
    const std::size_t idx = static_cast<std::size_t>(s->second) * num_courses + c->second;
    inst.preference_[idx] = p.preference;
    inst.forbidden_[idx] = p.forbidden ? 1 : 0;
    inst.kappa_[idx] = p.taught_last_year ? 1 : 0;
  }

  inst.pinned_hours_.assign(num_pairs * kTaskKinds, -1);
  inst.pinned_course_.assign(num_pairs, 0);
  for (std::size_t i = 0; i < spec.pins.size(); ++i) {
    const auto& pin = spec.pins[i];
    const std::string path = at("pins", i);
    auto s = ta_ids.find(pin.ta_id);
    if (s == ta_ids.end()) throw ValidationError(path + ".ta", "unknown TA '" + pin.ta_id + "'");
    auto c = course_ids.find(pin.course_id);
    if (c == course_ids.end())
      throw ValidationError(path + ".course", "unknown course '" + pin.course_id + "'");
    const std::size_t idx = static_cast<std::size_t>(s->second) * num_courses + c->second;
    if (pin.task.has_value() != pin.hours.has_value())
      throw ValidationError(path, "an hours pin needs both task and hours");
    if (!pin.task) {
      inst.pinned_course_[idx] = 1;
      continue;
    }
    const int t = static_cast<int>(*pin.task);
    const int tau = inst.hours_[static_cast<std::size_t>(c->second) * kTaskKinds + t];
    if (*pin.hours < 0 || *pin.hours > tau)
      throw ValidationError(path + ".hours", "pinned hours out of [0," + std::to_string(tau) + "]");
    int& slot = inst.pinned_hours_[idx * kTaskKinds + t];
    if (slot >= 0 && slot != *pin.hours) throw ValidationError(path, "cell already pinned");
    slot = *pin.hours;
  }

  inst.spec_ = std::move(spec);
  return inst;
}

// ---- JSON ---------------------------------------------------------------

Json to_json(const BoundConfig& b) {
  Json j;
  j["hard_dev"] = b.hard_dev;
  j["soft_dev"] = b.soft_dev;
  j["hard_new_courses"] = b.hard_new_courses;
  j["soft_new_courses"] = b.soft_new_courses;
  j["hard_courses_per_ta"] = b.hard_courses_per_ta;
  j["soft_courses_per_ta"] = b.soft_courses_per_ta;
  j["hard_tas_per_course"] = b.hard_tas_per_course;
  j["soft_extra_tas_per_task"] = b.soft_extra_tas_per_task;
  j["min_task_hours"] = b.min_task_hours;
  j["annual_full_load"] = b.annual_full_load;
  return j;
}

Json to_json(const WeightConfig& w) {
  Json j;
  j["target_year5"] = w.target_year5;
  j["soft_dev"] = w.soft_dev;
  j["soft_new"] = w.soft_new;
  j["soft_staff"] = w.soft_staff;
  j["soft_courses"] = w.soft_courses;
  j["pref_positive"] = w.pref_positive;
  j["pref_negative"] = w.pref_negative;
  j["penalty_mode"] = std::string(to_string(w.penalty_mode));
  return j;
}

Json to_json(const Pin& pin) {
  Json j;
  j["ta"] = pin.ta_id;
  j["course"] = pin.course_id;
  if (pin.task) j["task"] = std::string(to_string(*pin.task));
  if (pin.hours) j["hours"] = *pin.hours;
  return j;
}

BoundConfig bounds_from_json(const Json& doc, std::optional<int> preset_year) {
  const std::string path = "bounds";
  require_object(doc, path);
  BoundConfig b = preset_year ? BoundConfig::for_year(*preset_year) : BoundConfig{};
  auto hard = [&](const char* key, int& field) {
    if (auto v = opt_int(doc, key, path)) {
      field = *v;
    } else if (!preset_year) {
      throw ParseError(path + ": missing key '" + key + "'");
    }
  };
  hard("hard_dev", b.hard_dev);
  hard("hard_new_courses", b.hard_new_courses);
  hard("hard_courses_per_ta", b.hard_courses_per_ta);
  hard("hard_tas_per_course", b.hard_tas_per_course);
  // Soft bounds default from the hard ones unless given.
  b.soft_dev = opt_int(doc, "soft_dev", path).value_or(b.hard_dev / 2);
  b.soft_new_courses = opt_int(doc, "soft_new_courses", path).value_or(0);
  b.soft_courses_per_ta =
      opt_int(doc, "soft_courses_per_ta", path).value_or(std::max(0, b.hard_courses_per_ta - 1));
  b.soft_extra_tas_per_task = opt_int(doc, "soft_extra_tas_per_task", path).value_or(0);
  b.min_task_hours = opt_int(doc, "min_task_hours", path).value_or(5);
  b.annual_full_load = opt_int(doc, "annual_full_load", path).value_or(350);
  return b;
}

WeightConfig weights_from_json(const Json& doc) {
  const std::string path = "weights";
  require_object(doc, path);
  WeightConfig w;
  w.target_year5 = opt_int(doc, "target_year5", path).value_or(w.target_year5);
  w.soft_dev = opt_int(doc, "soft_dev", path).value_or(w.soft_dev);
  w.soft_new = opt_int(doc, "soft_new", path).value_or(w.soft_new);
  w.soft_staff = opt_int(doc, "soft_staff", path).value_or(w.soft_staff);
  w.soft_courses = opt_int(doc, "soft_courses", path).value_or(w.soft_courses);
  w.pref_positive = opt_int(doc, "pref_positive", path).value_or(w.pref_positive);
  w.pref_negative = opt_int(doc, "pref_negative", path).value_or(w.pref_negative);
  if (auto it = doc.find("penalty_mode"); it != doc.end()) {
    if (!it->is_string()) throw ParseError(path + ".penalty_mode: expected string");
    auto mode = penalty_mode_from_string(it->get<std::string>());
    if (!mode) throw ValidationError(path + ".penalty_mode", "must be indicator or magnitude");
    w.penalty_mode = *mode;
  }
  return w;
}

Pin pin_from_json(const Json& doc) {
  const std::string path = "pin";
  require_object(doc, path);
  Pin pin;
  pin.ta_id = str_member(doc, "ta", path);
  pin.course_id = str_member(doc, "course", path);
  if (auto it = doc.find("task"); it != doc.end() && !it->is_null())
    pin.task = parse_kind(*it, path + ".task");
  pin.hours = opt_int(doc, "hours", path);
  return pin;
}

Instance instance_from_json(const Json& doc) {
  require_object(doc, "$");
  InstanceSpec spec;
  if (auto it = doc.find("label"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("label: expected string");
    spec.label = it->get<std::string>();
  }
  std::optional<int> preset = opt_int(doc, "parameter_year", "$");

  if (auto it = doc.find("bounds"); it != doc.end()) {
    spec.bounds = bounds_from_json(*it, preset);
  } else if (preset) {
    spec.bounds = BoundConfig::for_year(*preset);
  } else {
    throw ParseError("$: missing key 'bounds'");
  }
  if (auto it = doc.find("weights"); it != doc.end()) spec.weights = weights_from_json(*it);

  const Json& tas = array_member(doc, "tas", "$");
  for (std::size_t i = 0; i < tas.size(); ++i) {
    const std::string path = at("tas", i);
    const Json& t = tas[i];
    require_object(t, path);
    TeachingAssistant ta;
    ta.id = str_member(t, "id", path);
    ta.year = int_member(t, "year", path);
    const Json& frac = member(t, "employment_fraction", path);
    if (!frac.is_number()) throw ParseError(path + ".employment_fraction: expected number");
    ta.employment_fraction = Fraction::from_double(frac.get<double>());
    ta.carryover_hours = opt_int(t, "carryover_hours", path).value_or(0);
    spec.tas.push_back(std::move(ta));
  }

  const Json& courses = array_member(doc, "courses", "$");
  for (std::size_t i = 0; i < courses.size(); ++i) {
    const std::string path = at("courses", i);
    const Json& c = courses[i];
    require_object(c, path);
    CourseSpec course;
    course.id = str_member(c, "id", path);
    const Json& tasks = array_member(c, "tasks", path);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const std::string tpath = at(path + ".tasks", k);
      require_object(tasks[k], tpath);
      CourseTask task;
      task.kind = parse_kind(member(tasks[k], "kind", tpath), tpath + ".kind");
      task.total_hours = int_member(tasks[k], "total_hours", tpath);
      task.required_tas = opt_int(tasks[k], "required_tas", tpath).value_or(0);
      course.tasks.push_back(task);
    }
    spec.courses.push_back(std::move(course));
  }

  if (auto it = doc.find("pairs"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("pairs: expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = at("pairs", i);
      const Json& p = (*it)[i];
      require_object(p, path);
      PairData pair;
      pair.ta_id = str_member(p, "ta", path);
      pair.course_id = str_member(p, "course", path);
      pair.preference = opt_int(p, "preference", path).value_or(0);
      pair.forbidden = opt_bool(p, "forbidden", path, false);
      pair.taught_last_year = opt_bool(p, "taught_last_year", path, false);
      spec.pairs.push_back(std::move(pair));
    }
  }

  if (auto it = doc.find("pins"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("pins: expected array");
    for (const auto& p : *it) spec.pins.push_back(pin_from_json(p));
  }

  return Instance::from_spec(std::move(spec));
}

Instance parse_instance(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return instance_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

Json to_json(const Instance& instance) {
  const InstanceSpec& spec = instance.spec();
  Json j;
  j["label"] = spec.label;
  j["bounds"] = to_json(spec.bounds);
  j["weights"] = to_json(spec.weights);

  Json tas = Json::array();
  for (const auto& ta : spec.tas) {
    Json t;
    t["id"] = ta.id;
    t["year"] = ta.year;
    t["employment_fraction"] = ta.employment_fraction.to_double();
    t["carryover_hours"] = ta.carryover_hours;
    tas.push_back(std::move(t));
  }
  j["tas"] = std::move(tas);

  Json courses = Json::array();
  for (int c = 0; c < instance.num_courses(); ++c) {
    Json course;
    course["id"] = instance.course_id(c);
    Json tasks = Json::array();
    for (int t = 0; t < kTaskKinds; ++t) {
      if (instance.task_hours(c, t) == 0) continue;
      Json task;
      task["kind"] = std::string(to_string(static_cast<TaskKind>(t)));
      task["total_hours"] = instance.task_hours(c, t);
      task["required_tas"] = instance.required_tas(c, t);
      tasks.push_back(std::move(task));
    }
    course["tasks"] = std::move(tasks);
    courses.push_back(std::move(course));
  }
  j["courses"] = std::move(courses);

  Json pairs = Json::array();
  for (int s = 0; s < instance.num_tas(); ++s) {
    for (int c = 0; c < instance.num_courses(); ++c) {
      const int pref = instance.preference(s, c);
      const bool xi = instance.forbidden(s, c);
      const bool kappa = instance.taught_last_year(s, c);
      if (pref == 0 && !xi && !kappa) continue;
      Json p;
      p["ta"] = instance.ta_id(s);
      p["course"] = instance.course_id(c);
      p["preference"] = pref;
      p["forbidden"] = xi;
      p["taught_last_year"] = kappa;
      pairs.push_back(std::move(p));
    }
  }
  j["pairs"] = std::move(pairs);

  Json pins = Json::array();
  for (const auto& pin : spec.pins) pins.push_back(to_json(pin));
  j["pins"] = std::move(pins);
  return j;
}

std::string serialize_instance(const Instance& instance) { return to_json(instance).dump(2) + "\n"; }

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << serialize_instance(instance);
}

CapacityReport capacity_report(const Instance& instance) {
  CapacityReport r;
  for (int c = 0; c < instance.num_courses(); ++c) {
    for (int t = 0; t < kTaskKinds; ++t) r.demand_hours += instance.task_hours(c, t);
  }
  std::int64_t supply = 0;
  for (int s = 0; s < instance.num_tas(); ++s) {
    r.target_hours += instance.target(s);
    supply += instance.target(s) + instance.bounds().hard_dev;
  }
  r.slack = supply - r.demand_hours;
  r.warning = r.slack < 0;
  return r;
}

}  // namespace tap
