#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rmpower {

enum class ErrorKind {
  Domain,              // argument outside a function's mathematical domain
  InvalidDesign,       // study design / effect specification breaks an invariant
  Unsatisfiable,       // solver cannot reach the target within its caps
  Validation,          // dataset fails RMDataset invariants
  ZeroVariance,        // F ratio undefined because the error mean square is zero
  SingularCovariance,  // contrast covariance not positive definite
  Degenerate,          // rank test with no information (all rows tied)
  Parse,               // malformed CSV / JSON input
  Io,
};

std::string_view to_string(ErrorKind kind);

// Base for every error raised by the library. The kind drives exit codes
// and HTTP status mapping in the service layer.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class ValidationIssue {
  Empty,
  TooFewTimes,
  RaggedRows,
  MissingCell,
  TooFewSubjects,
  MismatchedTimes,
  DuplicateSubject,
};

std::string_view to_string(ValidationIssue issue);

// Dataset invariant breach. Coordinates are zero-based indices into the
// offending group block, subject row and time column where applicable.
class ValidationError : public Error {
 public:
  ValidationError(ValidationIssue issue, const std::string& message,
                  std::optional<std::size_t> group = std::nullopt,
                  std::optional<std::size_t> row = std::nullopt,
                  std::optional<std::size_t> column = std::nullopt)
      : Error(ErrorKind::Validation, message),
        issue_(issue),
        group_(group),
        row_(row),
        column_(column) {}

  ValidationIssue issue() const noexcept { return issue_; }
  std::optional<std::size_t> group() const noexcept { return group_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> column() const noexcept { return column_; }

 private:
  ValidationIssue issue_;
  std::optional<std::size_t> group_;
  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

// Text input error; line and column are one-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0)
      : Error(ErrorKind::Parse, message), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace rmpower
