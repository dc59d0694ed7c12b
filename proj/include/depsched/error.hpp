#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace depsched {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside an operation's domain (negative workload, zero makespan).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Least-squares input without two distinct workloads.
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

// A keyed model (e.g. communication for an (ag, eg) split) that was never calibrated.
class LookupError : public Error {
 public:
  using Error::Error;
};

// The instance or configuration admits no feasible schedule.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Malformed input document; the message carries file and line when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Enumeration bounds that would exceed the evaluation budget.
class BoundsError : public Error {
 public:
  BoundsError(const std::string& what, std::size_t estimate)
      : Error(what), estimate_(estimate) {}

  std::size_t estimate() const noexcept { return estimate_; }

 private:
  std::size_t estimate_;
};

}  // namespace depsched
