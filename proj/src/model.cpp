#include "tap/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <unordered_map>

namespace tap::model {

namespace {

std::string idx(int a) { return std::to_string(a); }

std::string sct(int s, int c, int t) { return "s" + idx(s) + ",c" + idx(c) + ",t" + idx(t); }
std::string sc(int s, int c) { return "s" + idx(s) + ",c" + idx(c); }
std::string ct(int c, int t) { return "c" + idx(c) + ",t" + idx(t); }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

class Builder {
 public:
  explicit Builder(ModelIR& ir) : ir_(ir) {}

  int add_var(VarKind kind, std::int64_t lo, std::int64_t hi, VarTag tag) {
    ir_.variables.push_back(Variable{kind, lo, hi, tag});
    return static_cast<int>(ir_.variables.size()) - 1;
  }

  void add_row(std::vector<Term> terms, Relation rel, std::int64_t rhs, std::string family,
               std::string index, int part = 0) {
    std::erase_if(terms, [](const Term& t) { return t.coef == 0; });
    ir_.constraints.push_back(
        LinearConstraint{std::move(terms), rel, rhs, Origin{std::move(family), std::move(index), part}});
  }

 private:
  ModelIR& ir_;
};

LinearConstraint row(std::vector<Term> terms, Relation rel, std::int64_t rhs, Origin origin) {
  std::erase_if(terms, [](const Term& t) { return t.coef == 0; });
  return LinearConstraint{std::move(terms), rel, rhs, std::move(origin)};
}

/// Splits an equality into (<=, >=); other rows are returned unchanged.
std::vector<LinearConstraint> split_equality(const LinearConstraint& body) {
  if (body.rel != Relation::eq) return {body};
  LinearConstraint le = body;
  le.rel = Relation::le;
  LinearConstraint ge = body;
  ge.rel = Relation::ge;
  return {le, ge};
}

std::pair<std::int64_t, std::int64_t> activity_range(const LinearConstraint& body,
                                                     const std::vector<Variable>& vars) {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  for (const auto& term : body.terms) {
    const auto& v = vars.at(term.var);
    const std::int64_t a = term.coef * v.lo;
    const std::int64_t b = term.coef * v.hi;
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  return {lo, hi};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace

std::string family_tag(SoftFamily family) { return "Eq" + std::to_string(static_cast<int>(family)); }

std::optional<SoftFamily> soft_family_from_tag(std::string_view tag) {
  for (auto f : kSoftFamilies) {
    if (family_tag(f) == tag) return f;
  }
  return std::nullopt;
}

int family_weight(const WeightConfig& w, SoftFamily family) {
  switch (family) {
    case SoftFamily::target_year5: return w.target_year5;
    case SoftFamily::soft_dev: return w.soft_dev;
    case SoftFamily::soft_new: return w.soft_new;
    case SoftFamily::soft_staff: return w.soft_staff;
    case SoftFamily::soft_courses: return w.soft_courses;
    case SoftFamily::pref_positive: return w.pref_positive;
    case SoftFamily::pref_negative: return w.pref_negative;
  }
  return 0;
}

void set_family_weight(WeightConfig& w, SoftFamily family, int value) {
  switch (family) {
    case SoftFamily::target_year5: w.target_year5 = value; break;
    case SoftFamily::soft_dev: w.soft_dev = value; break;
    case SoftFamily::soft_new: w.soft_new = value; break;
    case SoftFamily::soft_staff: w.soft_staff = value; break;
    case SoftFamily::soft_courses: w.soft_courses = value; break;
    case SoftFamily::pref_positive: w.pref_positive = value; break;
    case SoftFamily::pref_negative: w.pref_negative = value; break;
  }
}

std::string var_name(const VarTag& tag) {
  auto s = [&] { return "_s" + idx(tag.s); };
  auto c = [&] { return "_c" + idx(tag.c); };
  auto t = [&] { return "_t" + idx(tag.t); };
  auto subject = [&] {
    std::string out;
    if (tag.s >= 0) out += s();
    if (tag.c >= 0) out += c();
    if (tag.t >= 0) out += t();
    return out;
  };
  switch (tag.family) {
    case VarFamily::x: return "x" + s() + c() + t();
    case VarFamily::y: return "y" + s() + c() + t();
    case VarFamily::w: return "w" + s() + c();
    case VarFamily::h: return "h" + s();
    case VarFamily::n: return "n" + c() + t();
    case VarFamily::z: return "z" + s();
    case VarFamily::violation: return "v" + idx(static_cast<int>(tag.soft)) + subject();
    case VarFamily::slack: return "d" + idx(static_cast<int>(tag.soft)) + subject();
  }
  return {};
}

std::optional<VarTag> parse_var_name(std::string_view name) {
  if (name.empty()) return std::nullopt;
  VarTag tag;
  std::size_t pos = 1;
  switch (name[0]) {
    case 'x': tag.family = VarFamily::x; break;
    case 'y': tag.family = VarFamily::y; break;
    case 'w': tag.family = VarFamily::w; break;
    case 'h': tag.family = VarFamily::h; break;
    case 'n': tag.family = VarFamily::n; break;
    case 'z': tag.family = VarFamily::z; break;
    case 'v':
    case 'd': {
      tag.family = name[0] == 'v' ? VarFamily::violation : VarFamily::slack;
      int eq = 0;
      auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), eq);
      if (ec != std::errc() || eq < 14 || eq > 20) return std::nullopt;
      tag.soft = static_cast<SoftFamily>(eq);
      pos = static_cast<std::size_t>(p - name.data());
      break;
    }
    default: return std::nullopt;
  }
  while (pos < name.size()) {
    if (name[pos] != '_' || pos + 2 > name.size()) return std::nullopt;
    const char key = name[pos + 1];
    int value = 0;
    auto [p, ec] = std::from_chars(name.data() + pos + 2, name.data() + name.size(), value);
    if (ec != std::errc() || value < 0) return std::nullopt;
    if (key == 's') tag.s = value;
    else if (key == 'c') tag.c = value;
    else if (key == 't') tag.t = value;
    else return std::nullopt;
    pos = static_cast<std::size_t>(p - name.data());
  }
  if (var_name(tag) != name) return std::nullopt;
  return tag;
}

std::int64_t big_m_for(const LinearConstraint& body, const std::vector<Variable>& variables) {
  auto [lo, hi] = activity_range(body, variables);
  std::int64_t m = 0;
  switch (body.rel) {
    case Relation::le: m = hi - body.rhs; break;
    case Relation::ge: m = body.rhs - lo; break;
    case Relation::eq: m = std::max(hi - body.rhs, body.rhs - lo); break;
  }
  m = std::max<std::int64_t>(m, 0);
  if (m > kMaxBigM) {
    throw BigMOverflow("big-M " + std::to_string(m) + " for " + body.origin.family + "[" +
                       body.origin.index + "] exceeds " + std::to_string(kMaxBigM));
  }
  return m;
}

std::vector<LinearConstraint> linearize_indicator(Literal condition, const LinearConstraint& body,
                                                  std::int64_t big_m) {
  if (big_m < 0 || big_m > kMaxBigM) {
    throw BigMOverflow("big-M " + std::to_string(big_m) + " outside [0, " + std::to_string(kMaxBigM) +
                       "]");
  }
  std::vector<LinearConstraint> out;
  int part = body.origin.part;
  for (LinearConstraint piece : split_equality(body)) {
    // lhs <= rhs + M(1 - cond)   /   lhs >= rhs - M(1 - cond)
    // with cond = v (value true) or 1 - v (value false).
    const bool le = piece.rel == Relation::le;
    std::int64_t coef = 0;
    std::int64_t rhs = piece.rhs;
    if (condition.value) {
      coef = le ? big_m : -big_m;
      rhs += le ? big_m : -big_m;
    } else {
      coef = le ? -big_m : big_m;
    }
    piece.terms.push_back(Term{coef, condition.var});
    piece.rhs = rhs;
    piece.origin.part = part++;
    out.push_back(row(std::move(piece.terms), piece.rel, piece.rhs, piece.origin));
  }
  return out;
}

ModelIR build(const Instance& instance) { return build(std::make_shared<const Instance>(instance)); }

ModelIR build(std::shared_ptr<const Instance> instance_ptr) {
  const Instance& inst = *instance_ptr;
  ModelIR ir;
  ir.source = instance_ptr;
  ir.mode = inst.weights().penalty_mode;
  ir.label = inst.label();
  {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a(to_json(inst.bounds()).dump() + to_json(inst.weights()).dump())));
    ir.config_hash = buf;
  }

  const int S = inst.num_tas();
  const int C = inst.num_courses();
  const int T = kTaskKinds;
  const BoundConfig& b = inst.bounds();
  Builder builder(ir);

  Layout& L = ir.layout;
  L.num_tas = S;
  L.num_courses = C;
  L.x.assign(static_cast<std::size_t>(S) * C * T, -1);
  L.y.assign(L.x.size(), -1);
  L.w.assign(static_cast<std::size_t>(S) * C, -1);
  L.n.assign(static_cast<std::size_t>(C) * T, -1);
  L.h.assign(S, -1);
  L.z.assign(S, -1);

  std::int64_t total_hours = 0;
  for (int c = 0; c < C; ++c) {
    for (int t = 0; t < T; ++t) total_hours += inst.task_hours(c, t);
  }

  // Variables, course-major so every row's last variable appears early.
  for (int c = 0; c < C; ++c) {
    for (int t = 0; t < T; ++t) {
      const int tau = inst.task_hours(c, t);
      for (int s = 0; s < S; ++s)
        L.x[L.cell(s, c, t)] = builder.add_var(VarKind::integer, 0, tau, {VarFamily::x, {}, s, c, t});
      for (int s = 0; s < S; ++s)
        L.y[L.cell(s, c, t)] = builder.add_var(VarKind::binary, 0, 1, {VarFamily::y, {}, s, c, t});
      L.n[static_cast<std::size_t>(c) * T + t] =
          builder.add_var(VarKind::integer, 0, S, {VarFamily::n, {}, -1, c, t});
    }
    for (int s = 0; s < S; ++s)
      L.w[static_cast<std::size_t>(s) * C + c] =
          builder.add_var(VarKind::binary, 0, 1, {VarFamily::w, {}, s, c, -1});
  }
  for (int s = 0; s < S; ++s) {
    L.h[s] = builder.add_var(VarKind::integer, 0, total_hours, {VarFamily::h, {}, s, -1, -1});
    L.z[s] = builder.add_var(VarKind::integer, 0, C, {VarFamily::z, {}, s, -1, -1});
  }

  // Eq1: forbidden pairs fix every task's hours to zero.
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c)
      if (inst.forbidden(s, c))
        for (int t = 0; t < T; ++t)
          builder.add_row({{1, L.x_id(s, c, t)}}, Relation::eq, 0, "Eq1", sct(s, c, t));

  // Eq2: h = sum of hours.
  for (int s = 0; s < S; ++s) {
    std::vector<Term> terms{{1, L.h[s]}};
    for (int c = 0; c < C; ++c)
      for (int t = 0; t < T; ++t) terms.push_back({-1, L.x_id(s, c, t)});
    builder.add_row(std::move(terms), Relation::eq, 0, "Eq2", "s" + idx(s));
  }

  // Eq3: teaching a task implies teaching the course.
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c)
      for (int t = 0; t < T; ++t)
        builder.add_row({{1, L.y_id(s, c, t)}, {-1, L.w_id(s, c)}}, Relation::le, 0, "Eq3", sct(s, c, t));

  // Channeling: y = 1 needs at least one hour, w = 1 needs at least one task.
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c) {
      for (int t = 0; t < T; ++t)
        builder.add_row({{1, L.y_id(s, c, t)}, {-1, L.x_id(s, c, t)}}, Relation::le, 0, "channel",
                        sct(s, c, t));
      std::vector<Term> terms{{1, L.w_id(s, c)}};
      for (int t = 0; t < T; ++t) terms.push_back({-1, L.y_id(s, c, t)});
      builder.add_row(std::move(terms), Relation::le, 0, "channel", sc(s, c));
    }

  // Eq4: z counts courses not taught last year.
  for (int s = 0; s < S; ++s) {
    std::vector<Term> terms{{1, L.z[s]}};
    for (int c = 0; c < C; ++c)
      terms.push_back({inst.taught_last_year(s, c) ? 0 : -1, L.w_id(s, c)});
    builder.add_row(std::move(terms), Relation::eq, 0, "Eq4", "s" + idx(s));
  }

  // Eq5: absent tasks carry no hours.
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < T; ++t)
      if (inst.task_hours(c, t) == 0)
        for (int s = 0; s < S; ++s)
          builder.add_row({{1, L.x_id(s, c, t)}}, Relation::eq, 0, "Eq5", sct(s, c, t));

  // Eq6: coverage.
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < T; ++t) {
      const int tau = inst.task_hours(c, t);
      if (tau == 0) continue;
      std::vector<Term> terms;
      for (int s = 0; s < S; ++s) terms.push_back({1, L.x_id(s, c, t)});
      builder.add_row(std::move(terms), Relation::eq, tau, "Eq6", ct(c, t));
    }

  // Eq7, conditional on y: y = 1 => min(tau, eps) <= x <= tau, y = 0 => x = 0.
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c)
      for (int t = 0; t < T; ++t) {
        const int tau = inst.task_hours(c, t);
        if (tau == 0) continue;
        const int lo = std::min(tau, b.min_task_hours);
        builder.add_row({{1, L.x_id(s, c, t)}, {-tau, L.y_id(s, c, t)}}, Relation::le, 0, "Eq7",
                        sct(s, c, t), 0);
        builder.add_row({{1, L.x_id(s, c, t)}, {-lo, L.y_id(s, c, t)}}, Relation::ge, 0, "Eq7",
                        sct(s, c, t), 1);
      }

  // Eq8: required staff.
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < T; ++t)
      if (inst.task_hours(c, t) > 0)
        builder.add_row({{1, L.n_id(c, t)}}, Relation::ge, inst.required_tas(c, t), "Eq8", ct(c, t));

  // n = sum of y.
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < T; ++t) {
      std::vector<Term> terms{{1, L.n_id(c, t)}};
      for (int s = 0; s < S; ++s) terms.push_back({-1, L.y_id(s, c, t)});
      builder.add_row(std::move(terms), Relation::eq, 0, "linking", ct(c, t));
    }

  // Eq9: hard deviation window.
  for (int s = 0; s < S; ++s) {
    builder.add_row({{1, L.h[s]}}, Relation::le, inst.target(s) + static_cast<std::int64_t>(b.hard_dev),
                    "Eq9", "s" + idx(s), 0);
    builder.add_row({{1, L.h[s]}}, Relation::ge, inst.target(s) - static_cast<std::int64_t>(b.hard_dev),
                    "Eq9", "s" + idx(s), 1);
  }

  // Eq10: courses per TA.
  for (int s = 0; s < S; ++s) {
    std::vector<Term> terms;
    for (int c = 0; c < C; ++c) terms.push_back({1, L.w_id(s, c)});
    builder.add_row(std::move(terms), Relation::le, b.hard_courses_per_ta, "Eq10", "s" + idx(s));
  }
  // Eq11: TAs per course.
  for (int c = 0; c < C; ++c) {
    std::vector<Term> terms;
    for (int s = 0; s < S; ++s) terms.push_back({1, L.w_id(s, c)});
    builder.add_row(std::move(terms), Relation::le, b.hard_tas_per_course, "Eq11", "c" + idx(c));
  }
  // Eq12: new courses per TA.
  for (int s = 0; s < S; ++s)
    builder.add_row({{1, L.z[s]}}, Relation::le, b.hard_new_courses, "Eq12", "s" + idx(s));
  // Eq13: single administrator.
  const int admin = static_cast<int>(TaskKind::admin);
  for (int c = 0; c < C; ++c)
    builder.add_row({{1, L.n_id(c, admin)}}, Relation::le, 1, "Eq13", "c" + idx(c));

  // Planner pins.
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c) {
      for (int t = 0; t < T; ++t)
        if (auto p = inst.pinned_hours(s, c, t))
          builder.add_row({{1, L.x_id(s, c, t)}}, Relation::eq, *p, "pin", sct(s, c, t));
      if (inst.pinned_course(s, c))
        builder.add_row({{1, L.w_id(s, c)}}, Relation::eq, 1, "pin", sc(s, c));
    }

  // Soft terms.
  const WeightConfig& wc = inst.weights();
  auto add_soft = [&](SoftFamily family, int s, int c, int t, std::vector<LinearConstraint> clause) {
    SoftTerm term;
    term.family = family;
    term.s = s;
    term.c = c;
    term.t = t;
    term.weight = family_weight(wc, family);
    const std::string tag = family_tag(family);
    VarTag vtag{ir.mode == PenaltyMode::indicator ? VarFamily::violation : VarFamily::slack, family, s,
                c, t};
    for (auto& r : clause) r.origin.family = tag;

    if (ir.mode == PenaltyMode::indicator) {
      term.realization = builder.add_var(VarKind::binary, 0, 1, vtag);
      int part = 0;
      for (const auto& body : clause) {
        for (const auto& piece : split_equality(body)) {
          LinearConstraint p = piece;
          p.origin.part = part;
          auto rows = linearize_indicator(Literal{term.realization, false}, p, big_m_for(p, ir.variables));
          for (auto& r : rows) {
            r.origin.part = part++;
            ir.constraints.push_back(std::move(r));
          }
        }
      }
    } else {
      std::int64_t max_violation = 0;
      for (const auto& body : clause) {
        for (const auto& piece : split_equality(body))
          max_violation = std::max(max_violation, big_m_for(piece, ir.variables));
      }
      term.realization = builder.add_var(VarKind::integer, 0, max_violation, vtag);
      int part = 0;
      for (const auto& body : clause) {
        for (auto piece : split_equality(body)) {
          piece.terms.push_back({piece.rel == Relation::le ? -1 : 1, term.realization});
          piece.origin.part = part++;
          ir.constraints.push_back(row(std::move(piece.terms), piece.rel, piece.rhs, piece.origin));
        }
      }
    }
    term.clause = std::move(clause);
    ir.soft_terms.push_back(std::move(term));
  };

  for (int s = 0; s < S; ++s)
    if (inst.year(s) >= 5)
      add_soft(SoftFamily::target_year5, s, -1, -1,
               {row({{1, L.h[s]}}, Relation::eq, inst.target(s), {"", "s" + idx(s), 0})});
  for (int s = 0; s < S; ++s)
    add_soft(SoftFamily::soft_dev, s, -1, -1,
             {row({{1, L.h[s]}}, Relation::le, inst.target(s) + static_cast<std::int64_t>(b.soft_dev),
                  {"", "s" + idx(s), 0}),
              row({{1, L.h[s]}}, Relation::ge, inst.target(s) - static_cast<std::int64_t>(b.soft_dev),
                  {"", "s" + idx(s), 1})});
  for (int s = 0; s < S; ++s)
    add_soft(SoftFamily::soft_new, s, -1, -1,
             {row({{1, L.z[s]}}, Relation::le, b.soft_new_courses, {"", "s" + idx(s), 0})});
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < T; ++t)
      if (inst.task_hours(c, t) > 0)
        add_soft(SoftFamily::soft_staff, -1, c, t,
                 {row({{1, L.n_id(c, t)}}, Relation::le,
                      static_cast<std::int64_t>(inst.required_tas(c, t)) + b.soft_extra_tas_per_task,
                      {"", ct(c, t), 0})});
  for (int s = 0; s < S; ++s) {
    std::vector<Term> terms;
    for (int c = 0; c < C; ++c) terms.push_back({1, L.w_id(s, c)});
    add_soft(SoftFamily::soft_courses, s, -1, -1,
             {row(std::move(terms), Relation::le, b.soft_courses_per_ta, {"", "s" + idx(s), 0})});
  }
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c)
      if (inst.preference(s, c) == 1)
        add_soft(SoftFamily::pref_positive, s, c, -1,
                 {row({{1, L.w_id(s, c)}}, Relation::ge, 1, {"", sc(s, c), 0})});
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c)
      if (inst.preference(s, c) == -1)
        add_soft(SoftFamily::pref_negative, s, c, -1,
                 {row({{1, L.w_id(s, c)}}, Relation::le, 0, {"", sc(s, c), 0})});

  return ir;
}

ModelStats model_stats(const ModelIR& ir) {
  static const char* kNames[] = {"x", "y", "w", "h", "n", "z", "violation", "slack"};
  ModelStats st;
  st.variables = ir.variables.size();
  st.constraints = ir.constraints.size();
  st.soft_terms = ir.soft_terms.size();
  for (const auto& v : ir.variables) ++st.variables_by_family[kNames[static_cast<int>(v.tag.family)]];
  for (const auto& c : ir.constraints) ++st.constraints_by_origin[c.origin.family];
  for (const auto& s : ir.soft_terms) ++st.soft_terms_by_family[family_tag(s.family)];
  return st;
}

void rebuild_layout(ModelIR& ir, int num_tas, int num_courses) {
  Layout L;
  L.num_tas = num_tas;
  L.num_courses = num_courses;
  L.x.assign(static_cast<std::size_t>(num_tas) * num_courses * kTaskKinds, -1);
  L.y.assign(L.x.size(), -1);
  L.w.assign(static_cast<std::size_t>(num_tas) * num_courses, -1);
  L.n.assign(static_cast<std::size_t>(num_courses) * kTaskKinds, -1);
  L.h.assign(num_tas, -1);
  L.z.assign(num_tas, -1);
  for (std::size_t i = 0; i < ir.variables.size(); ++i) {
    const VarTag& g = ir.variables[i].tag;
    const int id = static_cast<int>(i);
    auto in_range = [&](bool s, bool c, bool t) {
      return (!s || (g.s >= 0 && g.s < num_tas)) && (!c || (g.c >= 0 && g.c < num_courses)) &&
             (!t || (g.t >= 0 && g.t < kTaskKinds));
    };
    switch (g.family) {
      case VarFamily::x:
        if (in_range(true, true, true)) L.x[L.cell(g.s, g.c, g.t)] = id;
        break;
      case VarFamily::y:
        if (in_range(true, true, true)) L.y[L.cell(g.s, g.c, g.t)] = id;
        break;
      case VarFamily::w:
        if (in_range(true, true, false)) L.w[static_cast<std::size_t>(g.s) * num_courses + g.c] = id;
        break;
      case VarFamily::n:
        if (in_range(false, true, true)) L.n[static_cast<std::size_t>(g.c) * kTaskKinds + g.t] = id;
        break;
      case VarFamily::h:
        if (in_range(true, false, false)) L.h[g.s] = id;
        break;
      case VarFamily::z:
        if (in_range(true, false, false)) L.z[g.s] = id;
        break;
      default: break;
    }
  }
  ir.layout = std::move(L);
}

ModelIR eliminate_fixed(const ModelIR& ir) {
  const std::size_t nv = ir.variables.size();
  std::vector<std::optional<std::int64_t>> fixed(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const auto& v = ir.variables[i];
    if (!v.is_realization() && v.lo == v.hi) fixed[i] = v.lo;
  }
  // Single-variable equalities fix their variable when the value is integral
  // and inside the bounds; repeat while substitutions expose new ones.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : ir.constraints) {
      if (c.rel != Relation::eq) continue;
      int free_var = -1;
      std::int64_t free_coef = 0;
      std::int64_t rest = 0;
      int free_count = 0;
      for (const auto& term : c.terms) {
        if (fixed[term.var]) {
          rest += term.coef * *fixed[term.var];
        } else {
          ++free_count;
          free_var = term.var;
          free_coef = term.coef;
        }
      }
      if (free_count != 1 || ir.variables[free_var].is_realization()) continue;
      const std::int64_t num = c.rhs - rest;
      if (num % free_coef != 0) continue;
      const std::int64_t value = num / free_coef;
      const auto& v = ir.variables[free_var];
      if (value < v.lo || value > v.hi) continue;
      fixed[free_var] = value;
      changed = true;
    }
  }

  ModelIR out;
  out.mode = ir.mode;
  out.label = ir.label;
  out.config_hash = ir.config_hash;
  out.source = ir.source;
  out.objective_offset = ir.objective_offset;
  out.eliminated = ir.eliminated;
  std::vector<int> remap(nv, -1);
  for (std::size_t i = 0; i < nv; ++i) {
    if (fixed[i]) {
      out.eliminated.emplace_back(ir.variables[i].tag, *fixed[i]);
    } else {
      remap[i] = static_cast<int>(out.variables.size());
      out.variables.push_back(ir.variables[i]);
    }
  }
  auto rewrite = [&](const LinearConstraint& c) {
    LinearConstraint r;
    r.rel = c.rel;
    r.rhs = c.rhs;
    r.origin = c.origin;
    for (const auto& term : c.terms) {
      if (fixed[term.var]) {
        r.rhs -= term.coef * *fixed[term.var];
      } else {
        r.terms.push_back({term.coef, remap[term.var]});
      }
    }
    return r;
  };
  for (const auto& c : ir.constraints) {
    LinearConstraint r = rewrite(c);
    if (r.terms.empty() && row_satisfied(r, {})) continue;
    out.constraints.push_back(std::move(r));
  }
  for (const auto& s : ir.soft_terms) {
    SoftTerm t = s;
    t.realization = remap[s.realization];
    t.clause.clear();
    for (const auto& c : s.clause) t.clause.push_back(rewrite(c));
    out.soft_terms.push_back(std::move(t));
  }
  rebuild_layout(out, ir.layout.num_tas, ir.layout.num_courses);
  return out;
}

std::int64_t row_activity(const LinearConstraint& r, const Valuation& values) {
  std::int64_t sum = 0;
  for (const auto& term : r.terms) sum += term.coef * values[term.var];
  return sum;
}

bool row_satisfied(const LinearConstraint& r, const Valuation& values) {
  const std::int64_t lhs = row_activity(r, values);
  switch (r.rel) {
    case Relation::le: return lhs <= r.rhs;
    case Relation::ge: return lhs >= r.rhs;
    case Relation::eq: return lhs == r.rhs;
  }
  return false;
}

std::int64_t objective_value(const ModelIR& ir, const Valuation& values) {
  std::int64_t obj = ir.objective_offset;
  for (const auto& s : ir.soft_terms) obj += s.weight * values[s.realization];
  return obj;
}

Valuation valuation_of(const ModelIR& ir, const Assignment& a) {
  if (!ir.source) throw Error("valuation_of needs a model compiled from an instance");
  const Instance& inst = *ir.source;
  Valuation values(ir.variables.size(), 0);
  for (std::size_t i = 0; i < ir.variables.size(); ++i) {
    const VarTag& g = ir.variables[i].tag;
    switch (g.family) {
      case VarFamily::x: values[i] = a.hours(g.s, g.c, g.t); break;
      case VarFamily::y: values[i] = a.teaches_task(g.s, g.c, g.t) ? 1 : 0; break;
      case VarFamily::w: values[i] = a.teaches_course(g.s, g.c) ? 1 : 0; break;
      case VarFamily::h: values[i] = a.total_hours(g.s); break;
      case VarFamily::n: values[i] = a.staff(g.c, g.t); break;
      case VarFamily::z: values[i] = a.new_courses(inst, g.s); break;
      default: break;
    }
  }
  // Smallest realization each soft term's rows admit.
  std::unordered_map<int, std::int64_t> lower;
  for (const auto& s : ir.soft_terms) lower[s.realization] = ir.variables[s.realization].lo;
  for (const auto& c : ir.constraints) {
    for (const auto& term : c.terms) {
      auto it = lower.find(term.var);
      if (it == lower.end()) continue;
      const std::int64_t rest = row_activity(c, values) - term.coef * values[term.var];
      const std::int64_t room = c.rhs - rest;  // coef * r (rel) room
      std::int64_t need = it->second;
      if ((c.rel == Relation::le && term.coef < 0) || (c.rel == Relation::ge && term.coef > 0)) {
        need = ceil_div(room, term.coef);
      }
      it->second = std::max(it->second, need);
    }
  }
  for (const auto& [var, value] : lower) values[var] = std::min(value, ir.variables[var].hi);
  return values;
}

Assignment assignment_from_valuation(const ModelIR& ir, const Valuation& values) {
  Assignment a(ir.layout.num_tas, ir.layout.num_courses);
  for (std::size_t i = 0; i < ir.variables.size(); ++i) {
    const VarTag& g = ir.variables[i].tag;
    if (g.family == VarFamily::x) a.set_hours(g.s, g.c, g.t, static_cast<int>(values[i]));
  }
  for (const auto& [tag, value] : ir.eliminated) {
    if (tag.family == VarFamily::x) a.set_hours(tag.s, tag.c, tag.t, static_cast<int>(value));
  }
  return a;
}

Evaluation evaluate(const ModelIR& ir, const Valuation& values) {
  Evaluation e;
  for (std::size_t i = 0; i < ir.variables.size(); ++i) {
    if (values[i] < ir.variables[i].lo || values[i] > ir.variables[i].hi) {
      e.feasible = false;
      break;
    }
  }
  for (std::size_t i = 0; e.feasible && i < ir.constraints.size(); ++i) {
    if (!row_satisfied(ir.constraints[i], values)) {
      e.feasible = false;
      e.first_violated = i;
    }
  }
  e.objective = objective_value(ir, values);
  return e;
}

}  // namespace tap::model
