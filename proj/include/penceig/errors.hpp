#pragma once

#include <stdexcept>
#include <string>

namespace penceig {

/// Malformed dimensions, index sets or argument combinations.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix submitted for factorization is numerically singular.  For a
/// shifted pencil matrix J - aL this means the shift a is an eigenvalue
/// of the pencil to working precision.
class SingularShift : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A spectral shift fell inside the guard band around the image of the
/// spurious infinite eigenvalue, where the shift-invert formulas have a
/// pole.
class DegenerateShift : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Gram matrix of an iteration basis is numerically rank deficient.
class RankDeficientBasis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative eigenvalue computation exceeded its sweep budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File format violation.  Carries the offending 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, long line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace penceig
