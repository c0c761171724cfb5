#pragma once

#include <stdexcept>
#include <string>

namespace btsc {

/// Malformed input text (JSON syntax, missing fields, wrong types).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally well-formed input that violates a model invariant.
/// The message names the offending element.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad scenario or tool configuration; maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace btsc
