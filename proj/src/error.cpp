#include "remem/error.hpp"

namespace remem {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroSize: return "ZeroSize";
    case ErrorCode::InvalidPageSize: return "InvalidPageSize";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::UnknownAllocation: return "UnknownAllocation";
    case ErrorCode::DuplicateAllocation: return "DuplicateAllocation";
    case ErrorCode::OutOfMemory: return "OutOfMemory";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::IncompatibleFormatVersion: return "IncompatibleFormatVersion";
    case ErrorCode::BindError: return "BindError";
    case ErrorCode::ConnectError: return "ConnectError";
    case ErrorCode::ConnectionLost: return "ConnectionLost";
    case ErrorCode::DuplicateWindowId: return "DuplicateWindowId";
    case ErrorCode::UnknownWindow: return "UnknownWindow";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::WindowClosed: return "WindowClosed";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::IntegrityError: return "IntegrityError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::UnknownFlag: return "UnknownFlag";
    case ErrorCode::ConflictingFlags: return "ConflictingFlags";
    case ErrorCode::BadValue: return "BadValue";
  }
  return "Unknown";
}

}  // namespace remem
