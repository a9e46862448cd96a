#pragma once

#include <stdexcept>
#include <string>

namespace tap {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON syntax, wrong types, missing keys).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a domain rule. `path` names the field.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace tap
