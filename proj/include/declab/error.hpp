#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace declab {

enum class ErrorCode {
  invalid_argument = 1,
  dimension_mismatch,
  budget_exceeded,
  precondition,
  parse,
  not_applicable,
};

// Base of every exception thrown by the library. The C API maps `code()` onto
// its status enum one-to-one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, std::string_view message,
                    ErrorCode code = ErrorCode::invalid_argument) {
  if (!condition) throw Error(code, std::string(message));
}

}  // namespace declab
