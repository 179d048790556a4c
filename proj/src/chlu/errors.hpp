#pragma once

#include <stdexcept>
#include <string>

namespace chlu {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument, dimension mismatch, non-finite input.
class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

// Malformed file content (IDX, checkpoint, dataset, config).
class FormatError : public Error {
public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

// Filesystem failure (open, write, rename).
class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(what) {}
};

struct EnergyBreakdown {
  double H = 0.0; // total
  double T = 0.0; // kinetic
  double V = 0.0; // learned potential
  double C = 0.0; // confinement
};

// Thrown when a state or energy component leaves the finite range during
// integration. Carries the failing step and its energy record.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, std::size_t step, EnergyBreakdown record)
      : Error(what), step(step), record(record) {}
  std::size_t step;
  EnergyBreakdown record;
};

} // namespace chlu
