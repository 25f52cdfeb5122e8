#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shapegrad {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The flow map lost orientation (det DT_s <= 0 or an inverted triangle).
class FlowDegeneracy : public Error {
 public:
  explicit FlowDegeneracy(const std::string& what, long triangle = -1)
      : Error(what), triangle_(triangle) {}
  long triangle() const { return triangle_; }

 private:
  long triangle_;
};

/// Malformed text input (mesh, field or config file).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A mesh that parsed correctly but breaks one of the mesh invariants.
class MeshValidationError : public Error {
 public:
  using Error::Error;
};

/// Factorization failed or the residual check did not pass.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Newton iteration did not reach the tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace shapegrad
