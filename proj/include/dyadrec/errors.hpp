#pragma once

#include <stdexcept>
#include <string>

namespace dyadrec {

// Malformed or inconsistent input data (CLI exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two structures that must agree do not, e.g. a rewired backbone whose
// degrees differ from the graph it was derived from.
class IntegrityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Pearson correlation requested on data with zero variance.
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace dyadrec
