#pragma once

#include <stdexcept>
#include <string>

namespace halfheat {

/// Raised when a quadrature or iteration cannot produce a finite, trustworthy number.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace halfheat
