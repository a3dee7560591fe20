#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltei {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of a routine, e.g. a point outside [-b, b].
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ToleranceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MemoryBudgetError : std::runtime_error {
  MemoryBudgetError(const std::string& what, std::size_t required, std::size_t budget)
      : std::runtime_error(what + ": requires " + std::to_string(required) +
                           " bytes, budget is " + std::to_string(budget) + " bytes"),
        required_bytes(required),
        budget_bytes(budget) {}
  std::size_t required_bytes;
  std::size_t budget_bytes;
};

// Malformed input file; `path` is the offending field, e.g. "atoms[1].coords[2]".
struct SchemaError : std::runtime_error {
  SchemaError(std::string field_path, const std::string& msg)
      : std::runtime_error(field_path + ": " + msg), path(std::move(field_path)) {}
  std::string path;
};

}  // namespace ltei
