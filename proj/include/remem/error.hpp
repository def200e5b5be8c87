#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace remem {

enum class ErrorCode {
  ZeroSize,
  InvalidPageSize,
  OutOfBounds,
  UnknownAllocation,
  DuplicateAllocation,
  OutOfMemory,
  IoError,
  IncompatibleFormatVersion,
  BindError,
  ConnectError,
  ConnectionLost,
  DuplicateWindowId,
  UnknownWindow,
  ProtocolError,
  WindowClosed,
  Unsupported,
  IntegrityError,
  ConfigError,
  EmptyGroup,
  UnknownFlag,
  ConflictingFlags,
  BadValue,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace remem
