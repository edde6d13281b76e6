#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace quadmesh {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// condition_number on a frame with det <= 0.
class DegenerateFrameError : public Error {
 public:
  using Error::Error;
};

// A barrier functional was evaluated on a corner with det <= 0.
class BarrierError : public Error {
 public:
  BarrierError(const std::string& what, int i, int j) : Error(what), i_(i), j_(j) {}
  int node_i() const noexcept { return i_; }
  int node_j() const noexcept { return j_; }

 private:
  int i_;
  int j_;
};

// Inconsistent boundary data or unknown built-in domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed weight expression; position is a byte offset into the source.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error("at offset " + std::to_string(position) + ": " + message),
        message_(message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t position_;
};

// Domain violation while evaluating a weight expression (log of a
// non-positive value, division by zero, non-finite result).
class EvalError : public Error {
 public:
  EvalError(const std::string& message, std::string subexpression)
      : Error(message + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

// Malformed grid file; line is 1-based.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// The untangling pre-pass ran out of sweeps with folds remaining.
class UntangleError : public Error {
 public:
  UntangleError(const std::string& what, int remaining_folds)
      : Error(what), remaining_folds_(remaining_folds) {}
  int remaining_folds() const noexcept { return remaining_folds_; }

 private:
  int remaining_folds_;
};

}  // namespace quadmesh
