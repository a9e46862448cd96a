#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tap/model.hpp"

namespace tap::encode {

class ModeError : public Error {
 public:
  using Error::Error;
};

class MissingVariable : public Error {
 public:
  explicit MissingVariable(std::string name) : Error("solution lacks " + name), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NonIntegerValue : public Error {
 public:
  using Error::Error;
};

/// The solution file says the model has no solution ("unsat", "infeasible").
class ReportedInfeasible : public Error {
 public:
  using Error::Error;
};

enum class Format { lp, smtlib };

struct EncodingArtifact {
  Format format = Format::lp;
  std::string text;
  /// IR variable id -> emitted name, and back.
  std::vector<std::string> names;
  std::map<std::string, int> ids;
  int num_tas = 0;
  int num_courses = 0;
  /// x cells removed from the IR before emission, with their values.
  std::vector<std::pair<model::VarTag, std::int64_t>> eliminated;
};

/// CPLEX LP text. Indicator soft terms are already linearized in the IR.
EncodingArtifact to_lp(const model::ModelIR& ir);

/// SMT-LIB v2 with one weighted `assert-soft` per soft term. Indicator mode
/// only; throws ModeError otherwise.
EncodingArtifact to_smtlib(const model::ModelIR& ir);

/// Reads `name value` lines (`#` comments) or an SMT model of
/// `(define-fun name () Int value)` forms. Every x variable of the artifact
/// must be present; other names are ignored.
Assignment parse_solution(const EncodingArtifact& artifact, std::string_view text);
Assignment import_solution(const EncodingArtifact& artifact, const std::filesystem::path& sol);

}  // namespace tap::encode
