#pragma once

#include <stdexcept>
#include <string>

namespace uavfog {

// Base for every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI when reporting failures.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : Error("config", what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

// Propeller radius outside [l/3, (sqrt(2)/2) l].
class StructuralError : public Error {
public:
  explicit StructuralError(const std::string& what) : Error("structure", what) {}
};

class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class PlanningError : public Error {
public:
  explicit PlanningError(const std::string& what) : Error("planning", what) {}
};

class InfeasibleError : public Error {
public:
  explicit InfeasibleError(const std::string& what) : Error("infeasible", what) {}
};

}  // namespace uavfog
