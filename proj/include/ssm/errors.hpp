#ifndef SSM_ERRORS_HPP
#define SSM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Distribution or model parameters outside their valid domain.
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Every particle carries log-weight -inf.
class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

/// Innovation covariance is not numerically invertible.
class SingularInnovationError : public Error {
 public:
  using Error::Error;
};

/// A model requires a capability (structure) it does not provide.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A model capability broke its contract (NaN output, exception, ...).
class ModelFault : public Error {
 public:
  ModelFault(std::string capability, std::size_t time_index, const std::string& what)
      : Error("model fault in " + capability + " at t=" + std::to_string(time_index) + ": " + what),
        capability_(std::move(capability)),
        time_index_(time_index) {}

  const std::string& capability() const noexcept { return capability_; }
  std::size_t time_index() const noexcept { return time_index_; }

 private:
  std::string capability_;
  std::size_t time_index_;
};

}  // namespace ssm

#endif  // SSM_ERRORS_HPP
