#pragma once

#include <stdexcept>
#include <string>

namespace judgekit {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorCategory { Input = 2, Provider = 3, Internal = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Malformed files, invalid arguments, schema or scale violations.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCategory::Input, what) {}
};

/// Judge-model provider failures (transport, exhausted retries, strict cache misses).
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what) : Error(ErrorCategory::Provider, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorCategory::Internal, what) {}
};

}  // namespace judgekit
