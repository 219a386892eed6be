#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace bethe {

// Counter-style random streams: a stream is a pure function of a 64-bit seed
// and a short key tuple (site index, sweep index, sample index, ...), so any
// partition of work across threads reproduces the same numbers bit for bit.
//
// Keys are mixed with splitmix64; the stream itself is xoshiro256**.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next(); }

    std::uint64_t next();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform integer in [0, n), unbiased.
    std::uint64_t below(std::uint64_t n);
    // Standard normal via Box-Muller (no cached second variate).
    double normal();

private:
    std::uint64_t s_[4];
};

// Stream domains, so that different consumers of one seed never collide.
namespace stream_tag {
inline constexpr std::uint64_t site = 0x5349544531ull;
inline constexpr std::uint64_t sweep = 0x5357455031ull;
inline constexpr std::uint64_t root_draw = 0x524f4f5431ull;
inline constexpr std::uint64_t forward_draw = 0x46575244ull;
inline constexpr std::uint64_t test = 0x54455354ull;
}  // namespace stream_tag

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace bethe
