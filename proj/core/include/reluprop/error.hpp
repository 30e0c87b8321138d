#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reluprop {

enum class ErrorKind {
  kDomain,                 // non-finite or out-of-range argument
  kShape,                  // inconsistent dimensions
  kParse,                  // malformed input file; field() names the offender
  kDegenerateCorrelation,  // |rho| = 1 passed where a density is required
  kNullEvent,              // conditioning on a probability-zero event
  kNumerical,              // internal consistency check failed
  kConfig,                 // invalid run configuration
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string field = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message,
                       std::string field = {});

}  // namespace reluprop
