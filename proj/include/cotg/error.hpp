#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cotg {

enum class ErrorCode {
  IdOrderViolation,
  UnknownEndpoint,
  DuplicateEdge,
  TerminalOutEdge,
  EmptySummary,
  UnknownNode,
  Unreachable,
  NoTerminal,
  ParseError,
  MalformedJson,
  SchemaViolation,
  InconsistentDecision,
  MergeConstraintViolation,
  OracleUnavailable,
  InvalidGraph,
  AuthError,
  Timeout,
  ProviderError,
  DivisionDomain,
  EmptyDataset,
  LengthMismatch,
  DanglingChunkIndex,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base for every failure raised by the library. `code()` identifies the
/// failure class; `what()` carries a human-readable message prefixed with it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Mermaid / text parse failure at a 1-based line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// An oracle response that violates the operation schema; `field()` names
/// the offending key path (e.g. "new_node.type", "edges[1].from").
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Non-success HTTP status from the completion endpoint. status 0 means
/// the transport failed before a response arrived.
class ProviderError : public Error {
 public:
  ProviderError(int status, const std::string& body_excerpt);
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace cotg
