#include "geoprove/diagnostics.hpp"

#include <fmt/format.h>

namespace geoprove {

std::string to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::UnresolvedLabel: return "UnresolvedLabel";
    case ErrorCode::UnresolvedToolName: return "UnresolvedToolName";
    case ErrorCode::OverloadAmbiguity: return "OverloadAmbiguity";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::OutputKindMismatch: return "OutputKindMismatch";
    case ErrorCode::DuplicateSignature: return "DuplicateSignature";
    case ErrorCode::LemmaProofFailed: return "LemmaProofFailed";
  }
  return "?";
}

namespace {

std::string render(ErrorCode code, const std::string& message, int line, int column) {
  if (line > 0) return fmt::format("{}:{}: {}: {}", line, column, to_string(code), message);
  return fmt::format("{}: {}", to_string(code), message);
}

}  // namespace

DslError::DslError(ErrorCode code, std::string message, int line, int column, std::string subject)
    : std::runtime_error(render(code, message, line, column)),
      code_(code),
      line_(line),
      column_(column),
      subject_(std::move(subject)),
      message_(std::move(message)) {}

}  // namespace geoprove
