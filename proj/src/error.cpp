#include "apt/error.hpp"

namespace apt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "Io";
    case ErrorKind::Schema: return "Schema";
    case ErrorKind::UnknownType: return "UnknownType";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ConstantInput: return "ConstantInput";
    case ErrorKind::DegenerateAgreement: return "DegenerateAgreement";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::NonPositiveBeta: return "NonPositiveBeta";
    case ErrorKind::VocabTooSmall: return "VocabTooSmall";
    case ErrorKind::ModelTooLarge: return "ModelTooLarge";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::EmptyPairs: return "EmptyPairs";
    case ErrorKind::MissingText: return "MissingText";
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::MissingData: return "MissingData";
    case ErrorKind::MissingAnnotations: return "MissingAnnotations";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema:
    case ErrorKind::UnknownType:
      return 2;
    case ErrorKind::Io:
    case ErrorKind::EmptyInput:
    case ErrorKind::EmptyCorpus:
    case ErrorKind::EmptyPairs:
    case ErrorKind::MissingText:
    case ErrorKind::MissingData:
    case ErrorKind::MissingAnnotations:
      return 3;
    case ErrorKind::ConstantInput:
    case ErrorKind::DegenerateAgreement:
    case ErrorKind::InsufficientData:
    case ErrorKind::DegenerateTable:
    case ErrorKind::DegenerateInput:
    case ErrorKind::AllZero:
      return 4;
    default:
      return 1;
  }
}

}  // namespace apt
