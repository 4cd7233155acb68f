#include "rmpower/errors.hpp"

namespace rmpower {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InvalidDesign: return "invalid_design";
    case ErrorKind::Unsatisfiable: return "unsatisfiable";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::ZeroVariance: return "zero_variance";
    case ErrorKind::SingularCovariance: return "singular_covariance";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

std::string_view to_string(ValidationIssue issue) {
  switch (issue) {
    case ValidationIssue::Empty: return "empty";
    case ValidationIssue::TooFewTimes: return "too_few_times";
    case ValidationIssue::RaggedRows: return "ragged_rows";
    case ValidationIssue::MissingCell: return "missing_cell";
    case ValidationIssue::TooFewSubjects: return "too_few_subjects";
    case ValidationIssue::MismatchedTimes: return "mismatched_t";
    case ValidationIssue::DuplicateSubject: return "duplicate_subject";
  }
  return "unknown";
}

}  // namespace rmpower
