#pragma once

#include <stdexcept>
#include <string>

namespace hlucb {

enum class ErrorCode {
  InvalidArgument,
  InvalidConfig,
  Domain,
  State,
  UnknownDuel,
  DuplicateOutcome,
  Terminated,
  Io,
  Parse,
  Mismatch,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the core; the C API maps `code()` onto status values.
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

}  // namespace hlucb
