#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace locstat {

/// Philox4x32-10 block function (Salmon et al., SC'11).
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                      std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer, used to hash tags into stream identifiers.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Purposes for which independent streams are drawn off one seed.
enum class Stream : std::uint64_t {
  innovations = 1,
  coupling = 2,
  centering = 3,
  reference = 4,
  stationary = 5,
  experiment = 6,
};

/// Stream id for replication `index` of a given purpose.
[[nodiscard]] constexpr std::uint64_t stream_id(Stream purpose, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(static_cast<std::uint64_t>(purpose)) ^ index);
}

/// Seed for replication `rep` of an experiment seeded with `seed`.
[[nodiscard]] constexpr std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t rep) noexcept {
  return splitmix64(seed ^ splitmix64(rep + 0x5851f42d4c957f2dULL));
}

/// Counter-based engine: the output is a pure function of (seed, stream, position).
/// Satisfies UniformRandomBitGenerator, so Boost.Random distributions can consume it.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform01() noexcept;

  /// Engine for a derived sub-stream; does not advance this engine.
  [[nodiscard]] CounterRng split(std::uint64_t tag) const noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace locstat
