#include "tailbound/rng.hpp"

namespace tailbound {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

PhiloxEngine::PhiloxEngine(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0, substream, static_cast<std::uint32_t>(stream),
               static_cast<std::uint32_t>(stream >> 32)} {}

void PhiloxEngine::refill() {
  block_ = philox4x32_10(counter_, key_);
  ++counter_[0];
  next_ = 0;
}

PhiloxEngine::result_type PhiloxEngine::operator()() {
  if (next_ == 4) refill();
  return block_[next_++];
}

double PhiloxEngine::uniform_open() {
  const std::uint64_t hi = (*this)() >> 6;  // 26 bits
  const std::uint64_t lo = (*this)() >> 5;  // 27 bits
  const std::uint64_t bits = (hi << 27) | lo;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace tailbound
