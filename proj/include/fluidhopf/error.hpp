#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluidhopf {

enum class ErrorCode {
  InvalidRates,
  InvalidGenerator,
  DimensionMismatch,
  IntegrationError,
  SpectralSplitError,
  SubspaceDefect,
  NoConvergence,
  GridError,
  DomainError,
  DerivativeUnavailable,
  HazardError,
  IllConditioned,
  NotConstantFamily,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fluidhopf
