#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmrf {

/// Bad argument or dimension mismatch.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A guarded enumeration or instance size limit was exceeded.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Graph structure not supported by the requested solver.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A statistic or metric is undefined for the given input.
class UndefinedStatistic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A solver could not produce a result.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qmrf
