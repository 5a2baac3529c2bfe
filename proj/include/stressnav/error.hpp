#pragma once

#include <stdexcept>
#include <string>

namespace stressnav {

// Base for all library errors. `kind()` is a short machine-readable tag used
// by the CLI when it reports a failure on one line.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

struct InvalidParameter : Error {
  explicit InvalidParameter(const std::string& w) : Error("invalid-parameter", w) {}
};

struct GeometryError : Error {
  explicit GeometryError(const std::string& w) : Error("geometry", w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};

struct SolverError : Error {
  SolverError(const std::string& w, double condition_estimate)
      : Error("solver", w), condition(condition_estimate) {}
  double condition;
};

struct FormatError : Error {
  explicit FormatError(const std::string& w) : Error("format", w) {}
};

struct CorpusError : Error {
  explicit CorpusError(const std::string& w) : Error("corpus", w) {}
};

}  // namespace stressnav
