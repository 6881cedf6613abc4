#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace apt {

enum class ErrorKind {
  Io,
  Schema,
  UnknownType,
  EmptyInput,
  LengthMismatch,
  ConstantInput,
  DegenerateAgreement,
  InsufficientData,
  DegenerateTable,
  DegenerateInput,
  NonPositiveBeta,
  VocabTooSmall,
  ModelTooLarge,
  EmptyCorpus,
  EmptyPairs,
  MissingText,
  AllZero,
  MissingData,
  MissingAnnotations,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the toolkit carries a kind so callers (and the CLI
// exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the "<Kind>: " prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

// CLI exit codes: 0 success, 2 schema error, 3 missing data, 4 numeric
// degeneracy, 1 anything else.
int exit_code_for(ErrorKind kind);

}  // namespace apt
