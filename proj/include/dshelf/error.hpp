#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dshelf {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or referentially inconsistent input data (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;

  DataError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  /// 1-based line number of the offending record, 0 when not line-bound.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// An LLM response that could not be turned into descriptors. Keeps the raw
/// text so batch runs can log it.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Transport-level failure talking to a remote backend. Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace dshelf
