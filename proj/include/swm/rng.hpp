#pragma once

#include <array>
#include <cstdint>

namespace swm {

/// Philox4x32-10 block function. Counter-based: the n-th output depends only
/// on (key, counter), so draws can be generated in any order or in parallel
/// without changing the stream.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 2>& key,
                                        const std::array<std::uint32_t, 4>& counter);

/// One 64-bit word of the (seed, stream) stream at position `counter`.
std::uint64_t philox_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Uniform double in [0, 1).
double philox_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Sequential view of one (seed, stream) stream. Copyable; never shared
/// between tasks - give each parallel task its own stream id instead.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    double uniform() { return philox_uniform(seed_, stream_, counter_++); }
    std::uint64_t next_u64() { return philox_u64(seed_, stream_, counter_++); }
    /// Standard normal via Box-Muller (consumes two counters).
    double gaussian();

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

/// Binomial(n, p) draw. Exact CDF inversion for small n*p, normal
/// approximation above (adequate for bootstrap resampling of large counts).
std::uint64_t sample_binomial(CounterRng& rng, std::uint64_t n, double p);

/// Pack sweep-row / plan / resample indices into a stream id. Field widths:
/// row < 2^24, plan < 2^20, resample < 2^20.
std::uint64_t stream_id(std::uint64_t row, std::uint64_t plan, std::uint64_t resample);

} // namespace swm
