#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nucleikit {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  out_of_bounds,
  duplicate,
  dangling_reference,
  bad_magic,
  version_mismatch,
  truncated,
  bad_channels,
  invariant,
  insufficient_data,
  mismatch,
  infeasible,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure inside the library is reported through this type so the CLI
// can print it as one machine-parseable line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nucleikit
