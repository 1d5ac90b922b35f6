#include "locstat/rng.hpp"

namespace locstat {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53U;
constexpr std::uint32_t kMulB = 0xCD9E8D57U;
constexpr std::uint32_t kWeylA = 0x9E3779B9U;
constexpr std::uint32_t kWeylB = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMulA, ctr[0], hi0, lo0);
    mulhilo(kMulB, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

CounterRng::result_type CounterRng::operator()() noexcept {
  if (used_ >= 4) {
    buffer_ = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                         key_);
    ++block_;
    used_ = 0;
  }
  const std::uint64_t lo = buffer_[used_];
  const std::uint64_t hi = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double CounterRng::uniform01() noexcept {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t k = (*this)() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

CounterRng CounterRng::split(std::uint64_t tag) const noexcept {
  const std::uint64_t seed = (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
  return CounterRng(seed, splitmix64(stream_ ^ splitmix64(tag)));
}

}  // namespace locstat
