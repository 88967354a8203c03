// Counter-based RNG: each draw is a stateless mix of (key, counter), so a
// stream keyed by (seed, trialIndex) yields the same values no matter how
// trials are partitioned across workers.
#pragma once

#include <cmath>
#include <cstdint>

namespace nmzi {

namespace detail {
// splitmix64 finalizer (Steele, Lea, Flood / Vigna).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(detail::mix64(seed ^ detail::mix64(stream))), counter_(0) {}

    std::uint64_t next_u64() {
        return detail::mix64(key_ ^ detail::mix64(counter_++ + 0x632be59bd9b4e019ULL));
    }

    /// Uniform in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal (Box-Muller, one value per call).
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace nmzi
