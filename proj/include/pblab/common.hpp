#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pblab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (divergence, step-size underflow, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Geometry too close to a singularity for the requested accuracy.
class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Two poles came closer than the collision threshold.
class CollisionError : public NumericalError {
 public:
  CollisionError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Adaptive refinement did not reach the requested tolerance.
class AccuracyError : public NumericalError {
 public:
  AccuracyError(const std::string& what, cplx best, double error)
      : NumericalError(what), best_(best), error_(error) {}
  cplx best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return error_; }

 private:
  cplx best_;
  double error_;
};

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

}  // namespace pblab
