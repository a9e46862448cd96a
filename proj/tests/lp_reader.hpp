#pragma once

// Reader for the LP subset the encoder writes, used to check that the text
// means the same thing as the model it came from. Written against the file
// format, not against the encoder's internals.

#include <algorithm>
#include <limits>
#include <map>
#include <tuple>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tap/model.hpp"

namespace tap::test {

inline model::ModelIR read_lp(const std::string& text, int num_tas, int num_courses) {
  using namespace model;
  ModelIR ir;
  std::map<std::string, int> ids;
  auto var = [&](const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    auto tag = parse_var_name(name);
    if (!tag) throw std::runtime_error("unknown variable name " + name);
    Variable v;
    v.tag = *tag;
    v.lo = 0;
    v.hi = std::numeric_limits<std::int32_t>::max();
    ir.variables.push_back(v);
    ids[name] = static_cast<int>(ir.variables.size()) - 1;
    return ids[name];
  };

  // Join continuation lines (leading whitespace after a statement) per section.
  std::istringstream in(text);
  std::string line, section;
  std::vector<std::pair<std::string, std::string>> statements;  // section, text
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '\\') continue;
    if (line[0] != ' ') {
      section = line;
      continue;
    }
    const bool continuation = line.size() > 1 && line[1] == ' ';
    if (continuation && !statements.empty()) {
      statements.back().second += line;
    } else {
      statements.emplace_back(section, line);
    }
  }

  auto parse_linear = [&](std::istringstream& ts, std::vector<Term>& terms, std::string& tail) {
    std::int64_t sign = 1;
    std::int64_t coef = 1;
    bool have_coef = false;
    std::string tok;
    while (ts >> tok) {
      if (tok == "+") sign = 1;
      else if (tok == "-") sign = -1;
      else if (tok == "<=" || tok == ">=" || tok == "=") {
        tail = tok;
        return;
      } else if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
        coef = std::stoll(tok);
        have_coef = true;
      } else {
        terms.push_back({sign * coef, var(tok)});
        sign = 1;
        coef = 1;
        have_coef = false;
      }
    }
    if (have_coef) tail = "const:" + std::to_string(sign * coef);
  };

  std::vector<Term> objective;
  for (const auto& [sec, body] : statements) {
    std::istringstream ts(body);
    if (sec == "Minimize") {
      std::string label, tail;
      ts >> label;
      parse_linear(ts, objective, tail);
    } else if (sec == "Subject To") {
      std::string label, rel;
      ts >> label;
      LinearConstraint row;
      row.origin.family = label.substr(0, label.find('_'));
      parse_linear(ts, row.terms, rel);
      std::erase_if(row.terms, [](const Term& t) { return t.coef == 0; });
      row.rel = rel == "<=" ? Relation::le : rel == ">=" ? Relation::ge : Relation::eq;
      ts >> row.rhs;
      ir.constraints.push_back(row);
    } else if (sec == "Bounds") {
      std::string a, op, b, op2, c;
      ts >> a >> op >> b;
      if (op == "=") {
        auto& v = ir.variables[var(a)];
        v.lo = v.hi = std::stoll(b);
      } else {
        ts >> op2 >> c;
        auto& v = ir.variables[var(b)];
        v.lo = std::stoll(a);
        v.hi = std::stoll(c);
      }
    } else if (sec == "Binaries" || sec == "Generals") {
      std::string name;
      while (ts >> name) {
        auto& v = ir.variables[var(name)];
        v.kind = sec == "Binaries" ? VarKind::binary : VarKind::integer;
        if (sec == "Binaries") {
          v.lo = std::max<std::int64_t>(v.lo, 0);
          v.hi = std::min<std::int64_t>(v.hi, 1);
        }
      }
    }
  }
  for (const auto& t : objective) {
    SoftTerm s;
    s.weight = t.coef;
    s.realization = t.var;
    if (t.coef != 0) ir.soft_terms.push_back(s);
  }
  // Put hours first so the enumeration branches on them rather than on totals.
  auto rank = [](const Variable& v) {
    switch (v.tag.family) {
      case VarFamily::x: return 0;
      case VarFamily::y: return 1;
      case VarFamily::n: return 2;
      case VarFamily::w: return 3;
      case VarFamily::z: return 4;
      case VarFamily::h: return 5;
      default: return 6;
    }
  };
  std::vector<int> order(ir.variables.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& va = ir.variables[a];
    const auto& vb = ir.variables[b];
    if (rank(va) != rank(vb)) return rank(va) < rank(vb);
    return std::tie(va.tag.c, va.tag.t, va.tag.s) < std::tie(vb.tag.c, vb.tag.t, vb.tag.s);
  });
  std::vector<int> where(order.size());
  std::vector<Variable> sorted;
  for (std::size_t i = 0; i < order.size(); ++i) {
    where[order[i]] = static_cast<int>(i);
    sorted.push_back(ir.variables[order[i]]);
  }
  ir.variables = std::move(sorted);
  for (auto& row : ir.constraints)
    for (auto& t : row.terms) t.var = where[t.var];
  for (auto& st : ir.soft_terms) st.realization = where[st.realization];
  rebuild_layout(ir, num_tas, num_courses);
  return ir;
}

}  // namespace tap::test
