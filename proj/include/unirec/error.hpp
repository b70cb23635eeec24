#pragma once

#include <stdexcept>
#include <string>

namespace unirec {

/// Invalid structural or configuration parameters.
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string &what) : std::invalid_argument(what) {}
};

/// A numerical routine was asked to work outside its domain.
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string &what) : std::domain_error(what) {}
};

/// Factorization failure or non-finite values inside a solver.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

/// Malformed, truncated or version-mismatched persisted file.
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string &what) : std::runtime_error(what) {}
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace unirec
