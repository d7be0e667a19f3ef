#include "swarmkdn/error.hpp"

namespace swarmkdn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TruncatedFrame: return "TruncatedFrame";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::BadIntStack: return "BadIntStack";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::AlreadyExists: return "AlreadyExists";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::InvalidEntry: return "InvalidEntry";
    case ErrorCode::UnknownSwitch: return "UnknownSwitch";
    case ErrorCode::UnknownHost: return "UnknownHost";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::MalformedBody: return "MalformedBody";
    case ErrorCode::EmptyId: return "EmptyId";
    case ErrorCode::InvalidId: return "InvalidId";
    case ErrorCode::NotFunctional: return "NotFunctional";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownPrefix: return "UnknownPrefix";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::DuplicateBootstrap: return "DuplicateBootstrap";
    case ErrorCode::UnknownPublisher: return "UnknownPublisher";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::NoCapableNode: return "NoCapableNode";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace swarmkdn
