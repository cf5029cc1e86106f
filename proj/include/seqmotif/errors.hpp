#pragma once

#include <stdexcept>
#include <string>

namespace seqmotif {

// Base for every error raised by the library. Callers that only care about
// "something in the pipeline failed" catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A required column or key is missing from an input file.
class SchemaError : public Error {
 public:
  SchemaError(std::string column, const std::string& what)
      : Error(what), column_(std::move(column)) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

// A row failed to parse and strict mode turned it fatal.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Two inputs that should describe the same corpus disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// The null model gives zero variance (expected fraction 0 or 1).
class DegenerateNullError : public Error {
 public:
  using Error::Error;
};

class FetchError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public FetchError {
 public:
  using FetchError::FetchError;
};

}  // namespace seqmotif
