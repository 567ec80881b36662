#pragma once

#include <stdexcept>
#include <string>

namespace fqm {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  SingularMatrix,
  ZeroState,
  NonConvergence,
  OffGrid,
  GridMismatch,
  NotPointwise,
  MissingDerivative,
  EvaluationFailure,
  Io,
  Parse,
  Schema,
  UnknownFormat,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure raised by fibreqm carries a code so
/// the C layer can translate it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace fqm
