#pragma once

#include <stdexcept>
#include <string>

namespace tenrank {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape or flavor of an argument does not match the operation's contract.
struct PreconditionError : Error {
  using Error::Error;
};

struct SingularMatrixError : PreconditionError {
  SingularMatrixError(const std::string& what, double smallest_sv)
      : PreconditionError(what), smallest_singular_value(smallest_sv) {}
  double smallest_singular_value;
};

struct NotCommutingError : Error {
  NotCommutingError(const std::string& what, double residual)
      : Error(what), max_commutator(residual) {}
  double max_commutator;
};

struct NotDiagonalizableError : Error {
  NotDiagonalizableError(const std::string& what, int index)
      : Error(what), witness_index(index) {}
  int witness_index;
};

struct NoInvertibleCombinationError : Error {
  NoInvertibleCombinationError(const std::string& what, double best_sv)
      : Error(what), best_smallest_singular_value(best_sv) {}
  double best_smallest_singular_value;
};

/// A reconstruction exceeded its tolerance budget.
struct ResidualError : Error {
  ResidualError(const std::string& what, double res)
      : Error(what), residual(res) {}
  double residual;
};

}  // namespace tenrank
