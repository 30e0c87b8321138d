#pragma once

#include <iosfwd>

namespace reluprop::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidateFail = 1;  // |z| above threshold
inline constexpr int kExitInput = 2;         // usage, parse, shape, config, domain
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitSlope = 4;
inline constexpr int kExitSelftest = 5;

/// Entry point behind main(). Normal output goes to `out`; warnings and the
/// single-line `error[<kind>]: ...` diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reluprop::cli
