#pragma once

#include <stdexcept>
#include <string>

namespace pga {

enum class ErrorCode {
  Singular,
  BadBlockShape,
  WrongDimension,
  BudgetExceeded,
  LimitExceeded,
  DependentPair,
  TypeTooLarge,
  SingularTransition,
  GammaMismatch,
  NontrivialAction,
  MissingCatalog,
  NoMatch,
  InvalidInput,
};

const char* error_code_name(ErrorCode c);

// Structured error carrying a machine-readable code; the message is free text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pga
