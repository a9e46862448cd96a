#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tap/assignment.hpp"
#include "tap/instance.hpp"

namespace tap::model {

/// Bounds-derived big-M above this value is rejected.
inline constexpr std::int64_t kMaxBigM = 1'000'000'000;

class BigMOverflow : public Error {
 public:
  using Error::Error;
};

enum class VarFamily : std::uint8_t { x, y, w, h, n, z, violation, slack };

/// Soft constraint families, numbered like the equations they realize.
enum class SoftFamily : std::uint8_t {
  target_year5 = 14,
  soft_dev = 15,
  soft_new = 16,
  soft_staff = 17,
  soft_courses = 18,
  pref_positive = 19,
  pref_negative = 20,
};

inline constexpr SoftFamily kSoftFamilies[] = {
    SoftFamily::target_year5, SoftFamily::soft_dev,      SoftFamily::soft_new,
    SoftFamily::soft_staff,   SoftFamily::soft_courses,  SoftFamily::pref_positive,
    SoftFamily::pref_negative,
};

/// "Eq14" .. "Eq20".
std::string family_tag(SoftFamily family);
std::optional<SoftFamily> soft_family_from_tag(std::string_view tag);
/// The weight a configuration assigns to a family.
int family_weight(const WeightConfig& weights, SoftFamily family);
void set_family_weight(WeightConfig& weights, SoftFamily family, int value);

struct VarTag {
  VarFamily family = VarFamily::x;
  SoftFamily soft = SoftFamily::target_year5;  // violation / slack only
  int s = -1;
  int c = -1;
  int t = -1;
  friend bool operator==(const VarTag& a, const VarTag& b) {
    const bool realization = a.family == VarFamily::violation || a.family == VarFamily::slack;
    return a.family == b.family && (!realization || a.soft == b.soft) && a.s == b.s && a.c == b.c &&
           a.t == b.t;
  }
};

/// Deterministic exchange-format name: x_s0_c1_t2, w_s0_c1, h_s0, n_c1_t2,
/// v15_s0 (violation indicator), d17_c0_t3 (slack; LP names may not start with e and a digit) and so on.
std::string var_name(const VarTag& tag);
std::optional<VarTag> parse_var_name(std::string_view name);

enum class VarKind : std::uint8_t { binary, integer };

struct Variable {
  VarKind kind = VarKind::integer;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  VarTag tag;

  bool is_realization() const {
    return tag.family == VarFamily::violation || tag.family == VarFamily::slack;
  }
};

enum class Relation : std::uint8_t { le, eq, ge };

struct Term {
  std::int64_t coef = 0;
  int var = -1;
  friend bool operator==(const Term&, const Term&) = default;
};

/// Where a constraint comes from: `family` is one of Eq1..Eq20, linking,
/// channel or pin; `index` names the subject (e.g. "s0,c1,t2"); `part`
/// distinguishes rows sharing both.
struct Origin {
  std::string family;
  std::string index;
  int part = 0;
  friend bool operator==(const Origin&, const Origin&) = default;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Relation rel = Relation::le;
  std::int64_t rhs = 0;
  Origin origin;
};

struct SoftTerm {
  SoftFamily family = SoftFamily::soft_dev;
  int s = -1;
  int c = -1;
  int t = -1;
  std::int64_t weight = 0;
  /// Violation indicator (indicator mode) or slack (magnitude mode).
  int realization = -1;
  /// Conjunction the term asks for, over structural variables only.
  std::vector<LinearConstraint> clause;
};

/// Dense variable id tables; -1 marks an absent or eliminated variable.
struct Layout {
  int num_tas = 0;
  int num_courses = 0;
  std::vector<int> x, y, w, h, n, z;

  int x_id(int s, int c, int t) const { return x[cell(s, c, t)]; }
  int y_id(int s, int c, int t) const { return y[cell(s, c, t)]; }
  int w_id(int s, int c) const { return w[static_cast<std::size_t>(s) * num_courses + c]; }
  int n_id(int c, int t) const { return n[static_cast<std::size_t>(c) * kTaskKinds + t]; }
  std::size_t cell(int s, int c, int t) const {
    return (static_cast<std::size_t>(s) * num_courses + c) * kTaskKinds + t;
  }
};

/// Normalized integer-linear model of one instance.
struct ModelIR {
  std::vector<Variable> variables;
  std::vector<LinearConstraint> constraints;
  std::vector<SoftTerm> soft_terms;
  PenaltyMode mode = PenaltyMode::indicator;
  std::int64_t objective_offset = 0;
  std::string label;
  std::string config_hash;
  Layout layout;
  /// Structural variables removed by eliminate_fixed, with their values.
  std::vector<std::pair<VarTag, std::int64_t>> eliminated;
  /// The instance the model was compiled from; null for models read back
  /// from exchange files.
  std::shared_ptr<const Instance> source;
};

/// Compiles hard Eqs. 1-13 (plus channeling and pins) and soft Eqs. 14-20.
ModelIR build(std::shared_ptr<const Instance> instance);
ModelIR build(const Instance& instance);

/// Smallest M such that lhs <= rhs + M (or lhs >= rhs - M) holds over the
/// variable bounds. Throws BigMOverflow beyond kMaxBigM.
std::int64_t big_m_for(const LinearConstraint& body, const std::vector<Variable>& variables);

struct Literal {
  int var = -1;
  bool value = true;  // the literal holds when var == value
};

/// Rows equivalent to (condition => body) for a binary condition.
/// Equalities become two rows. Throws BigMOverflow when big_m > kMaxBigM.
std::vector<LinearConstraint> linearize_indicator(Literal condition, const LinearConstraint& body,
                                                  std::int64_t big_m);

struct ModelStats {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::size_t soft_terms = 0;
  std::map<std::string, std::size_t> variables_by_family;    // "x", "y", ..., "violation"
  std::map<std::string, std::size_t> constraints_by_origin;  // "Eq6", "channel", ...
  std::map<std::string, std::size_t> soft_terms_by_family;   // "Eq15", ...
};

ModelStats model_stats(const ModelIR& ir);

/// Removes structural variables whose bounds, or a single-variable equality,
/// fix them; substitutes their values everywhere.
ModelIR eliminate_fixed(const ModelIR& ir);

// ---- valuations ----------------------------------------------------------

using Valuation = std::vector<std::int64_t>;

/// lhs value of a row under a valuation.
std::int64_t row_activity(const LinearConstraint& row, const Valuation& values);
bool row_satisfied(const LinearConstraint& row, const Valuation& values);

/// Objective value: offset + sum of weight * realization.
std::int64_t objective_value(const ModelIR& ir, const Valuation& values);

/// Valuation induced by an assignment: derived variables recomputed from the
/// hours, realizations set to the smallest value their rows allow.
Valuation valuation_of(const ModelIR& ir, const Assignment& assignment);

/// Assignment read off the x variables (eliminated ones included).
Assignment assignment_from_valuation(const ModelIR& ir, const Valuation& values);

struct Evaluation {
  bool feasible = true;
  std::optional<std::size_t> first_violated;
  std::int64_t objective = 0;
};

Evaluation evaluate(const ModelIR& ir, const Valuation& values);

/// Rebuilds `layout` from variable tags (used after parsing or elimination).
void rebuild_layout(ModelIR& ir, int num_tas, int num_courses);

}  // namespace tap::model
