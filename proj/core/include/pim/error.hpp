#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested manifold/density combination has no supported code path.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling accepted too few proposals.
class DegenerateDensity : public Error {
 public:
  using Error::Error;
};

/// A query point is outside the support of every kernel bump.
class OutOfSupport : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::vector<double> history = {})
      : Error(what), history_(std::move(history)) {}

  /// Residual (or diagnostic) history collected before the failure.
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

class MultiplicityMismatch : public Error {
 public:
  MultiplicityMismatch(std::size_t discrete_dim, std::size_t reference_dim)
      : Error("multiplicity mismatch: discrete group has dimension " +
              std::to_string(discrete_dim) + ", reference has " +
              std::to_string(reference_dim)),
        discrete_dim_(discrete_dim),
        reference_dim_(reference_dim) {}

  std::size_t discrete_dim() const noexcept { return discrete_dim_; }
  std::size_t reference_dim() const noexcept { return reference_dim_; }

 private:
  std::size_t discrete_dim_;
  std::size_t reference_dim_;
};

}  // namespace pim
