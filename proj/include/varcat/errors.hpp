#pragma once

#include <stdexcept>
#include <string>

namespace varcat {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: corpora, feature files, manifests, unparseable code.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class CollisionError : public DataError {
 public:
  using DataError::DataError;
};

class InvalidIdentifier : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateCorpus : public DataError {
 public:
  using DataError::DataError;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class UnknownIds : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientCarriers : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Failures talking to the model under test.
class ModelError : public Error {
 public:
  using Error::Error;
};

class ModelUnreachable : public ModelError {
 public:
  using ModelError::ModelError;
};

class MalformedResponse : public ModelError {
 public:
  using ModelError::ModelError;
};

/// A verification run stopped early; completed observations are in the journal.
class AbortedRun : public ModelError {
 public:
  AbortedRun(const std::string& what, std::size_t completed)
      : ModelError(what), completed_(completed) {}
  std::size_t completed() const { return completed_; }

 private:
  std::size_t completed_;
};

}  // namespace varcat
