#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11) and a
// standard-normal stream built on top of it. A stream is fully identified by
// (seed, stream index), so independent substreams need no shared state.

#include <array>
#include <cstdint>

namespace reluprop {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Hashes (seed, a, b) into a fresh 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Uniforms in (0, 1) with 53 random bits and standard normals obtained by
/// inverting the normal CDF.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  double uniform() noexcept;
  double normal();

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

}  // namespace reluprop
