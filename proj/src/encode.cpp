#include "tap/encode.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tap::encode {

namespace {

using model::LinearConstraint;
using model::ModelIR;
using model::Relation;
using model::VarFamily;
using model::VarKind;

constexpr std::size_t kLineWidth = 200;

EncodingArtifact skeleton(const ModelIR& ir, Format format) {
  EncodingArtifact a;
  a.format = format;
  a.num_tas = ir.layout.num_tas;
  a.num_courses = ir.layout.num_courses;
  a.eliminated = ir.eliminated;
  for (std::size_t i = 0; i < ir.variables.size(); ++i) {
    std::string name = model::var_name(ir.variables[i].tag);
    if (!a.ids.emplace(name, static_cast<int>(i)).second) throw Error("duplicate variable name " + name);
    a.names.push_back(std::move(name));
  }
  return a;
}

/// "Eq7_s0_c1_t2_1"; unique within the document.
std::string row_name(const model::Origin& o, std::size_t i, std::set<std::string>& used) {
  std::string name = o.family.empty() ? "r" + std::to_string(i) : o.family;
  if (!o.index.empty()) {
    name += '_';
    for (char ch : o.index) name += ch == ',' ? '_' : ch;
  }
  if (o.part > 0) name += "_" + std::to_string(o.part);
  if (!used.insert(name).second) {
    name += "_r" + std::to_string(i);
    used.insert(name);
  }
  return name;
}

/// Writes tokens, wrapping long lines with a leading space (LP continuation).
class Wrapper {
 public:
  explicit Wrapper(std::ostringstream& out) : out_(out) {}
  void start(const std::string& head) {
    out_ << head;
    width_ = head.size();
  }
  void token(const std::string& t) {
    if (width_ + t.size() + 1 > kLineWidth) {
      out_ << "\n  ";
      width_ = 2;
    } else {
      out_ << ' ';
      ++width_;
    }
    out_ << t;
    width_ += t.size();
  }
  void end() { out_ << '\n'; }

 private:
  std::ostringstream& out_;
  std::size_t width_ = 0;
};

void lp_terms(Wrapper& w, const std::vector<model::Term>& terms, const EncodingArtifact& a) {
  bool first = true;
  for (const auto& t : terms) {
    const std::int64_t mag = t.coef < 0 ? -t.coef : t.coef;
    std::string tok;
    if (!first || t.coef < 0) tok = t.coef < 0 ? "- " : "+ ";
    if (mag != 1) tok += std::to_string(mag) + " ";
    tok += a.names[t.var];
    w.token(tok);
    first = false;
  }
}

const char* lp_rel(Relation r) {
  switch (r) {
    case Relation::le: return "<=";
    case Relation::ge: return ">=";
    case Relation::eq: return "=";
  }
  return "=";
}

void comment_header(std::ostringstream& out, const ModelIR& ir, const char* lead) {
  out << lead << " tap model " << (ir.label.empty() ? "unnamed" : ir.label) << '\n';
  out << lead << " config " << ir.config_hash << '\n';
  out << lead << " penalty_mode " << to_string(ir.mode) << '\n';
}

std::string smt_int(std::int64_t v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

std::string smt_sum(const std::vector<model::Term>& terms, const EncodingArtifact& a) {
  if (terms.empty()) return "0";
  std::vector<std::string> parts;
  for (const auto& t : terms) {
    const std::string& n = a.names[t.var];
    parts.push_back(t.coef == 1 ? n : "(* " + smt_int(t.coef) + " " + n + ")");
  }
  if (parts.size() == 1) return parts[0];
  std::string out = "(+";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

std::string smt_row(const LinearConstraint& row, const EncodingArtifact& a) {
  const char* op = row.rel == Relation::le ? "<=" : row.rel == Relation::ge ? ">=" : "=";
  return std::string("(") + op + " " + smt_sum(row.terms, a) + " " + smt_int(row.rhs) + ")";
}

}  // namespace

EncodingArtifact to_lp(const ModelIR& ir) {
  EncodingArtifact a = skeleton(ir, Format::lp);
  std::ostringstream out;
  comment_header(out, ir, "\\");

  out << "Minimize\n";
  {
    Wrapper w(out);
    w.start(" obj:");
    std::vector<model::Term> terms;
    for (const auto& s : ir.soft_terms)
      if (s.weight != 0) terms.push_back({s.weight, s.realization});
    if (terms.empty()) {
      w.token(a.names.empty() ? "0" : "0 " + a.names[0]);
    } else {
      lp_terms(w, terms, a);
    }
    if (ir.objective_offset > 0) w.token("+ " + std::to_string(ir.objective_offset));
    if (ir.objective_offset < 0) w.token("- " + std::to_string(-ir.objective_offset));
    w.end();
  }

  out << "Subject To\n";
  std::set<std::string> used;
  for (std::size_t i = 0; i < ir.constraints.size(); ++i) {
    const LinearConstraint& row = ir.constraints[i];
    Wrapper w(out);
    w.start(" " + row_name(row.origin, i, used) + ":");
    if (row.terms.empty()) {
      // The format has no constant-only rows; a zero term keeps the check.
      w.token(a.names.empty() ? "0" : "0 " + a.names[0]);
    } else {
      lp_terms(w, row.terms, a);
    }
    w.token(lp_rel(row.rel));
    w.token(std::to_string(row.rhs));
    w.end();
  }

  out << "Bounds\n";
  for (std::size_t i = 0; i < ir.variables.size(); ++i) {
    const auto& v = ir.variables[i];
    if (v.kind == VarKind::binary && v.lo == 0 && v.hi == 1) continue;
    if (v.lo == v.hi) {
      out << ' ' << a.names[i] << " = " << v.lo << '\n';
    } else {
      out << ' ' << v.lo << " <= " << a.names[i] << " <= " << v.hi << '\n';
    }
  }
  auto section = [&](const char* head, VarKind kind) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < ir.variables.size(); ++i)
      if (ir.variables[i].kind == kind) ids.push_back(i);
    if (ids.empty()) return;
    out << head << '\n';
    Wrapper w(out);
    w.start("");
    for (std::size_t i : ids) w.token(a.names[i]);
    w.end();
  };
  section("Binaries", VarKind::binary);
  section("Generals", VarKind::integer);
  out << "End\n";
  a.text = out.str();
  return a;
}

EncodingArtifact to_smtlib(const ModelIR& ir) {
  if (ir.mode != PenaltyMode::indicator)
    throw ModeError("SMT-LIB export needs penalty_mode indicator, model uses " + std::string(to_string(ir.mode)));
  EncodingArtifact a = skeleton(ir, Format::smtlib);
  std::ostringstream out;
  comment_header(out, ir, ";");
  out << "(set-option :produce-models true)\n";
  for (std::size_t i = 0; i < ir.variables.size(); ++i) out << "(declare-fun " << a.names[i] << " () Int)\n";
  for (std::size_t i = 0; i < ir.variables.size(); ++i) {
    const auto& v = ir.variables[i];
    out << "(assert (and (<= " << smt_int(v.lo) << ' ' << a.names[i] << ") (<= " << a.names[i] << ' '
        << smt_int(v.hi) << ")))\n";
  }
  std::set<std::string> used;
  for (std::size_t i = 0; i < ir.constraints.size(); ++i) {
    const LinearConstraint& row = ir.constraints[i];
    const std::string name = row_name(row.origin, i, used);
    // Indicator rows tie each violation flag to its clause; the clause itself
    // is what the soft assertions below weigh.
    out << "(assert (! " << smt_row(row, a) << " :named " << name << "))\n";
  }
  for (const auto& s : ir.soft_terms) {
    std::string body;
    if (s.clause.size() == 1) {
      body = smt_row(s.clause[0], a);
    } else {
      body = "(and";
      for (const auto& r : s.clause) body += " " + smt_row(r, a);
      body += ")";
    }
    out << "(assert-soft " << body << " :weight " << s.weight << " :id penalty)\n";
  }
  out << "(check-sat)\n(get-objectives)\n(get-model)\n";
  a.text = out.str();
  return a;
}

namespace {

std::int64_t integer_value(const std::string& name, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw NonIntegerValue(name + ": not a number: " + v);
  }
  if (used != v.size()) throw NonIntegerValue(name + ": not a number: " + v);
  const double r = std::round(d);
  if (std::fabs(d - r) > 1e-6) throw NonIntegerValue(name + " = " + v + " is not an integer");
  return static_cast<std::int64_t>(r);
}

std::vector<std::string> sexpr_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  bool comment = false;
  for (char ch : text) {
    if (comment) {
      if (ch == '\n') comment = false;
      continue;
    }
    if (ch == ';') {
      flush();
      comment = true;
    } else if (ch == '(' || ch == ')') {
      flush();
      out.emplace_back(1, ch);
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

/// (define-fun NAME () Int VALUE) forms of an SMT model.
std::map<std::string, std::int64_t> read_smt_model(std::string_view text) {
  std::map<std::string, std::int64_t> values;
  const auto tok = sexpr_tokens(text);
  for (std::size_t i = 0; i + 6 < tok.size(); ++i) {
    if (tok[i] != "define-fun" || tok[i + 2] != "(" || tok[i + 3] != ")" || tok[i + 4] != "Int") continue;
    const std::string& name = tok[i + 1];
    if (tok[i + 5] == "(" && i + 8 < tok.size() && tok[i + 6] == "-" && tok[i + 8] == ")") {
      values[name] = -integer_value(name, tok[i + 7]);
    } else {
      values[name] = integer_value(name, tok[i + 5]);
    }
  }
  return values;
}

std::map<std::string, std::int64_t> read_pairs(std::string_view text) {
  std::map<std::string, std::int64_t> values;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream f(line);
    std::string name, value;
    if (!(f >> name) || name[0] == '#') continue;
    if (!(f >> value)) throw NonIntegerValue(name + ": missing value");
    values[name] = integer_value(name, value);
  }
  return values;
}

}  // namespace

Assignment parse_solution(const EncodingArtifact& artifact, std::string_view text) {
  {
    std::istringstream in{std::string(text)};
    std::string word;
    while (in >> word) {
      if (word[0] == '#' || word[0] == ';') {
        std::getline(in, word);
        continue;
      }
      if (word == "unsat" || word == "infeasible" || word == "INFEASIBLE")
        throw ReportedInfeasible("solution file reports " + word);
      break;
    }
  }
  const bool smt = text.find("(define-fun") != std::string_view::npos;
  const auto values = smt ? read_smt_model(text) : read_pairs(text);

  Assignment out(artifact.num_tas, artifact.num_courses);
  for (const auto& [tag, value] : artifact.eliminated) {
    if (tag.family == VarFamily::x) out.set_hours(tag.s, tag.c, tag.t, static_cast<int>(value));
  }
  for (const auto& [name, id] : artifact.ids) {
    auto tag = model::parse_var_name(name);
    if (!tag || tag->family != VarFamily::x) continue;
    auto it = values.find(name);
    if (it == values.end()) throw MissingVariable(name);
    out.set_hours(tag->s, tag->c, tag->t, static_cast<int>(it->second));
  }
  return out;
}

Assignment import_solution(const EncodingArtifact& artifact, const std::filesystem::path& sol) {
  std::ifstream in(sol, std::ios::binary);
  if (!in) throw Error("cannot read " + sol.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_solution(artifact, buf.str());
}

}  // namespace tap::encode
