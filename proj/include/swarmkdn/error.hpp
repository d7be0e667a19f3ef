#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace swarmkdn {

enum class ErrorCode {
  // packet codec
  TruncatedFrame,
  MalformedFrame,
  BadIntStack,
  InvariantViolation,
  // switch state
  AlreadyExists,
  NotFound,
  UnknownGroup,
  InvalidEntry,
  UnknownSwitch,
  UnknownHost,
  // control channel framing
  BadMagic,
  BadLength,
  UnknownType,
  MalformedBody,
  // knowledge graph
  EmptyId,
  InvalidId,
  NotFunctional,
  SyntaxError,
  UnknownPrefix,
  UnboundVariable,
  // controller
  DuplicateBootstrap,
  UnknownPublisher,
  NoPath,
  NoCapableNode,
  // scenario / io
  ParseError,
  UnknownEntity,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as an Error carrying a code the
/// caller can switch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Decoding failure that pins the byte offset where the input went wrong.
class DecodeError : public Error {
 public:
  DecodeError(ErrorCode code, std::size_t offset, const std::string& what)
      : Error(code, what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Query text failure with a 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(ErrorCode code, int line, int column, const std::string& what)
      : Error(code, what + " (line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace swarmkdn
