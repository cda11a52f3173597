#include "nucleikit/error.hpp"

namespace nucleikit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::out_of_bounds: return "out_of_bounds";
    case ErrorCode::duplicate: return "duplicate";
    case ErrorCode::dangling_reference: return "dangling_reference";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::bad_channels: return "bad_channels";
    case ErrorCode::invariant: return "invariant";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::mismatch: return "mismatch";
    case ErrorCode::infeasible: return "infeasible";
  }
  return "unknown";
}

}  // namespace nucleikit
