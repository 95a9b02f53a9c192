#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mondi {

// Precondition violations on public operations (shape mismatch, empty input,
// out-of-range parameters).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or truncated file content. `offset` is the byte position at which
// parsing failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// A synthetic scene that violates its own invariants (e.g. a ray that hits
// no plane inside the depth range).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The optimizer produced a non-finite objective.
class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(const std::string& what, int iteration)
      : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

}  // namespace mondi
