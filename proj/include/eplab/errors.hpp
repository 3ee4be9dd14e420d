#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace eplab {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Field sample count or grid does not match the operation's grid.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Poisson data with a nonzero mean has no periodic potential.
class NonZeroMean : public Error {
 public:
  using Error::Error;
};

// Argument outside its admissible range (block index, Besov index, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

// The grid cannot host the q = 0 dyadic shell.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

// Bernstein ratio requested for a block that vanishes.
class ZeroBlock : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

class NonPositiveSeries : public Error {
 public:
  using Error::Error;
};

// A state left the domain where the model is defined: n <= 0, or
// (gamma-1)/2 m + psi_bar <= 0 on the isentropic branch.
class DomainViolation : public Error {
 public:
  // time is NaN when the violation is detected outside a time loop.
  DomainViolation(const std::string& what, std::size_t location,
                  double time = std::numeric_limits<double>::quiet_NaN())
      : Error(what + (std::isnan(time) ? std::string() : " at t=" + std::to_string(time)) +
              " (sample index " + std::to_string(location) + ")"),
        time_(time),
        location_(location) {}

  double time() const noexcept { return time_; }
  std::size_t location() const noexcept { return location_; }

 private:
  double time_;
  std::size_t location_;
};

class NonPositiveDensity : public DomainViolation {
 public:
  using DomainViolation::DomainViolation;
};

class CflViolation : public Error {
 public:
  using Error::Error;
};

// Configuration problem; field() names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace eplab
