#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lipcert {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteError : Error {
  using Error::Error;
};

struct DimensionMismatchError : Error {
  using Error::Error;
};

struct NotPsdError : Error {
  using Error::Error;
};

struct NoConvergenceError : Error {
  NoConvergenceError(const std::string& what, double last_estimate, double residual)
      : Error(what), last_estimate(last_estimate), residual(residual) {}
  double last_estimate;  // singular-value estimate at the last iteration
  double residual;       // relative Rayleigh-quotient change at that iteration
};

struct UndefinedGradientError : Error {
  using Error::Error;
};

struct DegenerateQuadrupleError : Error {
  using Error::Error;
};

struct ZeroMatrixError : Error {
  using Error::Error;
};

struct ZeroRadiusError : Error {
  using Error::Error;
};

// File ingestion errors.
struct IoError : Error {
  using Error::Error;
};

struct NotSquareError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}
  std::size_t line;    // 1-based
  std::size_t column;  // 1-based
};

}  // namespace lipcert
