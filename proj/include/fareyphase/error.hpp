#ifndef FAREYPHASE_ERROR_HPP
#define FAREYPHASE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fareyphase {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class domain_error : public error {
public:
  using error::error;
};

/// A level or size cap was exceeded.
class level_too_large : public error {
public:
  using error::error;
};

/// An exact integer quantity would not fit in 64 bits.
class overflow_error : public error {
public:
  using error::error;
};

/// An iterative solver ran out of iterations.
class convergence_error : public error {
public:
  convergence_error(const std::string& what, double last_residual)
      : error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

} // namespace fareyphase

#endif
