#pragma once
// Error types shared by all targa modules.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace targa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` and `column` are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// A query graph or logic form that violates a structural invariant.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// A remote provider (embedding, reranker, chat) failed.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, std::string endpoint)
      : Error(endpoint.empty() ? what : what + " [" + endpoint + "]"),
        endpoint_(std::move(endpoint)) {}

  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace targa
