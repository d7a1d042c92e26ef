#pragma once

#include <stdexcept>
#include <string>

namespace fuelgame {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct ModelError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct HypothesisError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct SchemeError : Error { using Error::Error; };

struct ConfigError : Error {
  ConfigError(int line, const std::string& msg)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line) {}
  int line;
};

}  // namespace fuelgame
