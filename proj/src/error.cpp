#include "reprindt/error.hpp"

namespace reprindt {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::missing_value: return "MissingValue";
    case ErrorCode::not_binary: return "NotBinary";
    case ErrorCode::unknown_level: return "UnknownLevel";
    case ErrorCode::schema_mismatch: return "SchemaMismatch";
    case ErrorCode::invalid_value: return "InvalidValue";
    case ErrorCode::invalid_parameter: return "InvalidParameter";
    case ErrorCode::empty_sample: return "EmptySample";
    case ErrorCode::degenerate_input: return "DegenerateInput";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::missing_class: return "MissingClass";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::io: return "IoError";
  }
  return "Error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace reprindt
