#pragma once

#include <stdexcept>
#include <string>

namespace corrmatch {

enum class ErrorCode {
  kInvalidArgument = 1,
  kSizeMismatch = 2,
  kSizeLimit = 3,
  kInfeasible = 4,
  kInternalConsistency = 5,
  kConfig = 6,
  kIo = 7,
};

// All library failures are reported as Error; the C API maps code() onto its
// status enum.
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

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace corrmatch
