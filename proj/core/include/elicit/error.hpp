#pragma once

#include <stdexcept>
#include <string>

namespace elicit {

/// Precondition or input-validation failure. `field` names the offending
/// input when one can be identified (e.g. "task.feature_dim").
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// An allocation needs more unlabeled examples than the candidate pool holds.
class InsufficientPoolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric or loss was asked for on input where it is undefined.
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Persisted artifact is unreadable or inconsistent with the expected schema.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace elicit
