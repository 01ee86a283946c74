#include "swm/rng.hpp"

#include <cmath>

namespace swm {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 2>& key,
                                        const std::array<std::uint32_t, 4>& counter)
{
    std::uint32_t k0 = key[0], k1 = key[1];
    std::array<std::uint32_t, 4> x = counter;
    for (int round = 0; round < 10; round++) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, x[0], hi0, lo0);
        mulhilo(kPhiloxM1, x[2], hi1, lo1);
        x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return x;
}

std::uint64_t philox_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
{
    std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                        static_cast<std::uint32_t>(seed >> 32)};
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    auto out = philox4x32(key, ctr);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double philox_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
{
    return static_cast<double>(philox_u64(seed, stream, counter) >> 11) * 0x1.0p-53;
}

double CounterRng::gaussian()
{
    double u1 = 1.0 - uniform(); // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t sample_binomial(CounterRng& rng, std::uint64_t n, double p)
{
    if (n == 0 || p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return n;
    }
    // Work with p <= 1/2 and mirror.
    if (p > 0.5) {
        return n - sample_binomial(rng, n, 1.0 - p);
    }
    double np = static_cast<double>(n) * p;
    if (np > 30.0) {
        double sd = std::sqrt(np * (1.0 - p));
        double draw = std::round(np + sd * rng.gaussian());
        if (draw < 0.0) {
            return 0;
        }
        if (draw > static_cast<double>(n)) {
            return n;
        }
        return static_cast<std::uint64_t>(draw);
    }
    // CDF inversion walking up from k = 0; pmf recurrence keeps it O(np).
    double u = rng.uniform();
    double q = 1.0 - p;
    double pmf = std::pow(q, static_cast<double>(n));
    double cdf = pmf;
    std::uint64_t k = 0;
    while (u > cdf && k < n) {
        pmf *= (static_cast<double>(n - k) / static_cast<double>(k + 1)) * (p / q);
        cdf += pmf;
        k++;
    }
    return k;
}

std::uint64_t stream_id(std::uint64_t row, std::uint64_t plan, std::uint64_t resample)
{
    return (row << 40) | (plan << 20) | resample;
}

} // namespace swm
