#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace morphocad {

enum class ErrorKind {
  InvalidContour,
  DegenerateRegion,
  OutOfBounds,
  InvalidParameter,
  Topology,
  NrlUndefined,
  Units,
  Unfittable,
  Schema,
  UndefinedAuc,
  AnovaUndefined,
  DuplicateId,
  MissingFile,
  Parse,
  Io,
  MissingBirads,
  NotFound,
};

/// Stable machine-readable name, used in CLI error JSON and HTTP bodies.
std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Prefixes the message with context (record id, plane, fold, step).
  Error with_context(std::string_view context) const {
    return Error(kind_, std::string(context) + ": " + what());
  }

 private:
  ErrorKind kind_;
};

}  // namespace morphocad
