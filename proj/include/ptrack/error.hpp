#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptrack {

enum class Errc {
  InvalidMeasurement,
  Numeric,
  DegenerateTransform,
  NoMotionEstimate,
  InvalidInput,
  InvalidAltitude,
  InvalidScore,
  Internal,
  DegeneratePatch,
  Shape,
  Sequencing,
  DivisionDomain,
  UndefinedCorrelation,
  CostDomain,
  Config,
  Parse,
  Format,
};

const char* to_string(Errc code) noexcept;

/// True for error kinds that indicate bad user input rather than a bug.
bool is_input_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Text-format error carrying the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(Errc::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ptrack
