#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brainergm {

/// Coarse failure category; the CLI maps each to an exit code and the HTTP
/// service to a status code.
enum class ErrorClass {
  usage,
  data,
  model,
  convergence,
  degeneracy,
  cancelled,
  internal,
};

std::string_view to_string(ErrorClass c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), class_(cls) {}

  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

/// Malformed input: bad files, out-of-range nodes, self-loops, bad weights.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorClass::data, what) {}
};

/// A model specification that failed validation or does not match its data.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what) : Error(ErrorClass::model, what) {}
};

class NonConvergenceError : public Error {
 public:
  explicit NonConvergenceError(const std::string& what)
      : Error(ErrorClass::convergence, what) {}
};

/// The observed statistics lie outside the convex hull of the sampled ones,
/// so the importance-sampling likelihood approximation has no maximizer.
class OutsideHullError : public NonConvergenceError {
 public:
  explicit OutsideHullError(const std::string& what) : NonConvergenceError(what) {}
};

class DegenerateModelError : public Error {
 public:
  explicit DegenerateModelError(const std::string& what)
      : Error(ErrorClass::degeneracy, what) {}
};

class CancelledError : public Error {
 public:
  CancelledError() : Error(ErrorClass::cancelled, "job cancelled") {}
};

}  // namespace brainergm
