#pragma once

#include <stdexcept>
#include <string>

namespace spls {

enum class ErrorCode {
  invalid_argument,  // caller violated a precondition
  parse,             // malformed file or config
  numeric,           // iteration cap / degenerate numerics
  io,                // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace spls
