#pragma once

#include <stdexcept>
#include <string>

namespace ldis {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tilt parameter outside the log-MGF domain, or invalid model parameters.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// The feasible set of a variational problem is empty (zero-hit regime).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

// support(p) is not contained in support(q).
class AbsContError : public Error {
 public:
  using Error::Error;
};

class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace ldis
