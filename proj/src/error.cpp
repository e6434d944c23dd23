#include "cotg/error.hpp"

namespace cotg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IdOrderViolation: return "IdOrderViolation";
    case ErrorCode::UnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::TerminalOutEdge: return "TerminalOutEdge";
    case ErrorCode::EmptySummary: return "EmptySummary";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::NoTerminal: return "NoTerminal";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::InconsistentDecision: return "InconsistentDecision";
    case ErrorCode::MergeConstraintViolation: return "MergeConstraintViolation";
    case ErrorCode::OracleUnavailable: return "OracleUnavailable";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::DivisionDomain: return "DivisionDomain";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DanglingChunkIndex: return "DanglingChunkIndex";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(int line, const std::string& message)
    : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

SchemaViolation::SchemaViolation(std::string field, const std::string& message)
    : Error(ErrorCode::SchemaViolation, field + ": " + message), field_(std::move(field)) {}

ProviderError::ProviderError(int status, const std::string& body_excerpt)
    : Error(ErrorCode::ProviderError, "status " + std::to_string(status) + ": " + body_excerpt),
      status_(status) {}

}  // namespace cotg
