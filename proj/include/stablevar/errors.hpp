#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stablevar {

// Base class for every failure raised by this library.  Catching this type is
// enough to distinguish library errors from anything else in flight.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed caller input: wrong shapes, non-finite entries, empty data, or
// arguments outside their documented domain.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(what) {}
};

// A matrix that must be symmetric positive definite is not.  Carries the
// offending (smallest) eigenvalue so callers can report how far off it was.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, double min_eigenvalue)
      : Error(what + " (min eigenvalue " + std::to_string(min_eigenvalue) + ")"),
        min_eigenvalue_(min_eigenvalue) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// A transition matrix whose spectral radius must be below one is not.
class UnstableMatrix : public Error {
 public:
  UnstableMatrix(const std::string& what, double spectral_radius)
      : Error(what + " (spectral radius " + std::to_string(spectral_radius) + ")"),
        spectral_radius_(spectral_radius) {}

  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

// A linear system without a usable solution (singular or numerically so).
class SingularSystem : public Error {
 public:
  explicit SingularSystem(const std::string& what) : Error(what) {}
};

// Requested reduced rank outside 1..n.
class InvalidRank : public Error {
 public:
  explicit InvalidRank(const std::string& what) : Error(what) {}
};

// A relative metric whose reference quantity is zero.
class ZeroReference : public Error {
 public:
  explicit ZeroReference(const std::string& what) : Error(what) {}
};

// Malformed text input.  Carries the 1-based line number of the first bad line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace stablevar
