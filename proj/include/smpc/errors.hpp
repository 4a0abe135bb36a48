#pragma once

#include <stdexcept>
#include <string>

namespace smpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix sizes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scenario or input failed one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Requested size exceeds what the dense algorithms are built for.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Iterations that fail to converge, singular systems, blown-up multipliers.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A stochastic linear recursion is not mean-square stable.
class MssError : public NumericalError {
 public:
  MssError(const std::string& what, double rho)
      : NumericalError(what), rho_(rho) {}
  double rho() const { return rho_; }

 private:
  double rho_;
};

/// The constraint floor lies above the budget, so no decision is feasible.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double g_min, double mu)
      : Error(what), g_min_(g_min), mu_(mu) {}
  double g_min() const { return g_min_; }
  double mu() const { return mu_; }

 private:
  double g_min_;
  double mu_;
};

/// An operation that requires the restricted (L = 0) policy got a full one.
class PolicyError : public Error {
 public:
  using Error::Error;
};

}  // namespace smpc
