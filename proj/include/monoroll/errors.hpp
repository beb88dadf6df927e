#pragma once

#include <stdexcept>
#include <string>

namespace monoroll {

// Bad argument to a pure function (non-finite input, out-of-range length).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Input series or file that does not conform to its declared shape.
class MalformedInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a geometric formula.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class DegenerateGeometry : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NoRealSolution : public std::runtime_error {
public:
  explicit NoRealSolution(double discriminant)
    : std::runtime_error("no real solution for d_b (discriminant " +
                         std::to_string(discriminant) + ")"),
      discriminant_(discriminant) {}

  double discriminant() const noexcept { return discriminant_; }

private:
  double discriminant_;
};

class SingularConfiguration : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Simulation state blew past the magnitude guard.
class Divergence : public std::runtime_error {
public:
  explicit Divergence(double dt, const std::string& what)
    : std::runtime_error("simulation diverged at dt=" + std::to_string(dt) +
                         ": " + what),
      dt_(dt) {}

  double dt() const noexcept { return dt_; }

private:
  double dt_;
};

// Config file problems: missing or unknown keys, unparsable values.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
    : std::runtime_error(what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace monoroll
