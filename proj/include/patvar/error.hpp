#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patvar {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (files, rows, records). Exit code 4 in the CLI.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvariantViolation : public DataError {
 public:
  InvariantViolation(std::string record_id, const std::string& what)
      : DataError("record '" + record_id + "': " + what), record_id_(std::move(record_id)) {}
  const std::string& record_id() const noexcept { return record_id_; }

 private:
  std::string record_id_;
};

class ProviderFailure : public Error {
 public:
  using Error::Error;
};

/// Pattern text that does not follow the grammar. Column is 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t column, const std::string& what)
      : Error("column " + std::to_string(column) + ": " + what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class InputTooLarge : public Error {
 public:
  using Error::Error;
};

class EmptyPositives : public Error {
 public:
  EmptyPositives() : Error("no positive examples") {}
};

class NoViablePattern : public Error {
 public:
  using Error::Error;
};

/// Errors talking to an LLM backend. Exit code 3 in the CLI.
class GatewayError : public Error {
 public:
  using Error::Error;
};

class BackendError : public GatewayError {
 public:
  BackendError(int status, std::string body)
      : GatewayError("backend returned status " + std::to_string(status) + ": " + body),
        status_(status),
        body_(std::move(body)) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

/// Raised by a backend when the request never produced an HTTP status
/// (connection refused, read timeout). Retried by the gateway.
class TransportError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class Timeout : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class CacheError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class ResponseFormatError : public Error {
 public:
  using Error::Error;
};

class LabelMismatch : public Error {
 public:
  using Error::Error;
};

class NoValidPhrases : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class NOverPool : public Error {
 public:
  NOverPool(std::size_t n, std::size_t pool)
      : Error("requested " + std::to_string(n) + " examples from a pool of " +
              std::to_string(pool)) {}
};

class KOverN : public Error {
 public:
  KOverN(std::size_t k, std::size_t n)
      : Error("k=" + std::to_string(k) + " exceeds point count " + std::to_string(n)) {}
};

class UntrainedClassifier : public Error {
 public:
  UntrainedClassifier() : Error("classifier has not been trained") {}
};

class EmptyTrainingSet : public Error {
 public:
  EmptyTrainingSet() : Error("empty training set") {}
};

class EmptyPredictions : public Error {
 public:
  EmptyPredictions() : Error("no predictions to score") {}
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class TooFewPairs : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public DataError {
 public:
  using DataError::DataError;
};

class UnknownLabel : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid experiment configuration. Exit code 2 in the CLI.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace patvar
