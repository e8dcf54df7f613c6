#ifndef DRPM_ERRORS_HPP
#define DRPM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace drpm {

// Malformed input: bad shapes, non-permutations, invalid parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An enumeration would exceed its desk-scale guard.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Real-valued argument outside its domain (tau <= 0, eps outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace drpm

#endif  // DRPM_ERRORS_HPP
