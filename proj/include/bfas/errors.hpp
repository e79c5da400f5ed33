#pragma once

#include <stdexcept>
#include <string>

namespace bfas {

/// Invalid argument values (nonpositive concentrations, empty inputs, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Shapes that do not line up (loadings vs. covariates, dataset vs. state).
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A linear-algebra step failed even after the jitter repair.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries the file/row/column address.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bfas
