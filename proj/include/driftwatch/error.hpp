#pragma once

#include <stdexcept>
#include <string>

namespace driftwatch {

// Base of every error the library throws. Subclasses map one-to-one onto
// the HTTP status families used by the server.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input bytes: bad JSON, ragged CSV, invalid UTF-8.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Registry conflicts such as an unknown parent version.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a semantic rule (mixed metric shapes,
// mismatched bins, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A stored file failed its invariant check on load.
class CorruptError : public Error {
 public:
  using Error::Error;
};

}  // namespace driftwatch
