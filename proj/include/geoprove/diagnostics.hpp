#pragma once

#include <stdexcept>
#include <string>

namespace geoprove {

enum class ErrorCode {
  SyntaxError,
  DuplicateLabel,
  UnknownType,
  UnresolvedLabel,
  UnresolvedToolName,
  OverloadAmbiguity,
  ArityMismatch,
  OutputKindMismatch,
  DuplicateSignature,
  LemmaProofFailed,
};

std::string to_string(ErrorCode code);

/// Load-time error of a tool file or script: parse, resolution and
/// registration problems. Line and column are 1-based; 0 means unknown.
class DslError : public std::runtime_error {
 public:
  DslError(ErrorCode code, std::string message, int line = 0, int column = 0,
           std::string subject = {});

  ErrorCode code() const { return code_; }
  int line() const { return line_; }
  int column() const { return column_; }
  /// Tool or label the error is about, when there is one.
  const std::string& subject() const { return subject_; }
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  int line_;
  int column_;
  std::string subject_;
  std::string message_;
};

}  // namespace geoprove
