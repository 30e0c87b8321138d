#include "reluprop/error.hpp"

#include <utility>

namespace reluprop {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kDegenerateCorrelation: return "degenerate-correlation";
    case ErrorKind::kNullEvent: return "null-event";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::string field)
    : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

void fail(ErrorKind kind, const std::string& message, std::string field) {
  throw Error(kind, message, std::move(field));
}

}  // namespace reluprop
