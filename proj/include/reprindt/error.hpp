#pragma once

#include <stdexcept>
#include <string>

namespace reprindt {

enum class ErrorCode {
  missing_value,
  not_binary,
  unknown_level,
  schema_mismatch,
  invalid_value,
  invalid_parameter,
  empty_sample,
  degenerate_input,
  length_mismatch,
  missing_class,
  config,
  io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// command line can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reprindt
