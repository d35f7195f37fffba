#pragma once

#include <stdexcept>
#include <string>

namespace linpm {

// Invalid caller input: malformed games, out-of-range parameters, bad configs.
// The CLI maps this family to exit code 2.
class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure inside a linear-algebra routine (singular/ill-conditioned system).
class IllConditionedError : public std::runtime_error {
 public:
  explicit IllConditionedError(const std::string& what) : std::runtime_error(what) {}
};

// A requested structure does not exist for the given game (e.g. asking for a
// hard instance of a kind the game's observability class cannot produce).
class NoWitnessError : public std::runtime_error {
 public:
  explicit NoWitnessError(const std::string& what) : std::runtime_error(what) {}
};

// The exploration program is infeasible at the requested learning rate: no
// distribution satisfies the information constraint.  Carries the smallest
// constraint value found so callers can report how far off the rate is.
// The CLI maps this to exit code 3.
class EtaTooLargeError : public std::runtime_error {
 public:
  EtaTooLargeError(const std::string& what, double min_constraint_value)
      : std::runtime_error(what), min_constraint_value(min_constraint_value) {}
  double min_constraint_value;
};

}  // namespace linpm
