#pragma once

#include <stdexcept>
#include <string>

namespace ecp {

/// Base class of all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An exactly zero pivot turned up during elimination.
struct SingularSystem : Error {
  using Error::Error;
};

/// A basis function cannot provide the requested derivative order.
struct CapabilityError : Error {
  using Error::Error;
};

/// A section-space failed the local Bernstein-like basis construction,
/// i.e. numerically it is not an extended Chebyshev space on its interval.
struct NotECSection : Error {
  NotECSection(const std::string& msg, int element_index)
      : Error(msg), element(element_index) {}
  int element;  // offending basis element, -1 if not tied to one
};

/// Operation requires a space containing constants (and dimension >= 2).
struct NotApplicable : Error {
  using Error::Error;
};

/// Bisection endpoints classify identically; there is nothing to bracket.
struct NoBracket : Error {
  using Error::Error;
};

/// Data produced under a certificate contradicts that certificate.
struct InternalInconsistency : Error {
  using Error::Error;
};

/// Line/field addressed failure from the space-description parser.
struct SpecParseError : Error {
  SpecParseError(int line_number, std::string field_name, const std::string& msg)
      : Error("line " + std::to_string(line_number) + ", " + field_name + ": " + msg),
        line(line_number),
        field(std::move(field_name)) {}
  int line;
  std::string field;
};

}  // namespace ecp
