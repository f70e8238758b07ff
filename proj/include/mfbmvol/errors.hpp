#pragma once

#include <stdexcept>
#include <string>

namespace mfbmvol {

enum class ErrorCode {
  invalid_argument = 1,
  degenerate_embedding = 2,
  factorization_failed = 3,
  cap_exceeded = 4,
  nonpositive_price = 5,
  io = 6,
  config = 7,
};

/// Every failure raised by the library carries one of the codes above; the C
/// API maps them one-to-one onto mfbmvol_status.
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

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace mfbmvol
