#pragma once

// Counter-based random streams. A stream is the pair (master_seed,
// stream_index); the n-th block of a stream is Philox4x32-10 applied to the
// counter (n, stream_index) under the key master_seed, so any draw can be
// reproduced without replaying the draws before it and streams can be
// consumed from any thread in any order.

#include <array>
#include <cstdint>

namespace cdkit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

using PhiloxBlock = std::array<std::uint32_t, 4>;

inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53U;
  constexpr std::uint32_t m1 = 0xCD9E8D57U;
  constexpr std::uint32_t w0 = 0x9E3779B9U;
  constexpr std::uint32_t w1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  /// A stream derived from this one; distinct (stream, child) pairs give
  /// distinct keys, so nested experiments never share draws with their parent.
  RngStream substream(std::uint64_t child) const {
    return {detail::splitmix64(master_seed ^ detail::splitmix64(stream_index + 0x632BE59BD9B4E019ULL)), child};
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Sequential reader over one stream. Copying an engine forks its position.
class RngEngine {
 public:
  explicit RngEngine(RngStream stream) : stream_(stream) {}

  std::uint64_t next_u64() {
    if (slot_ == 2) refill();
    return buffer_[slot_++];
  }

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  const RngStream& stream() const { return stream_; }
  std::uint64_t blocks_consumed() const { return block_; }

 private:
  void refill() {
    const PhiloxBlock ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_.stream_index),
                          static_cast<std::uint32_t>(stream_.stream_index >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(stream_.master_seed),
                                           static_cast<std::uint32_t>(stream_.master_seed >> 32)};
    const PhiloxBlock out = philox4x32_10(ctr, key);
    buffer_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    buffer_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    ++block_;
    slot_ = 0;
  }

  RngStream stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int slot_ = 2;
};

}  // namespace cdkit
