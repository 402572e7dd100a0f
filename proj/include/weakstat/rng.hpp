#pragma once

#include <array>
#include <cstdint>

namespace weakstat {

/// Philox4x32-10 keyed block function. Counter-based: the output block is a
/// pure function of (counter, key), so any draw can be generated in any order
/// on any worker.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// One independent random stream, addressed as (seed, stream).
///
/// The sampler maps stream indices to shot indices, which makes every result
/// a pure function of (seed, shots) no matter how the shot range is sharded
/// across workers.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit();

    std::uint64_t next_u64();

  private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int available_ = 0;
};

} // namespace weakstat
