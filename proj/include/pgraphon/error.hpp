#pragma once

#include <stdexcept>
#include <string>

namespace pgraphon {

/// Input violates a mathematical precondition (negative mass where a measure
/// is required, graphon values outside [0,1], malformed metric, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Two operands do not live on the same decoration space or part structure.
class MismatchError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// No common uniform refinement exists within the configured denominator cap.
class RefinementError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A requested exhaustive computation exceeds its enumeration budget.
class BudgetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON document; the message names the offending JSON pointer.
class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace pgraphon
