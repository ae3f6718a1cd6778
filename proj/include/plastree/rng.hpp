#pragma once

#include <array>
#include <cstdint>

namespace plastree {

// Counter-based random numbers (Philox-4x32, 10 rounds). Every consumer
// derives its draws from (seed, domain, key words, draw index), so results
// never depend on iteration order, thread count, or rank count.

enum class RngDomain : std::uint32_t {
    Choose = 1,      // partner selection draws, keyed by (step, neuron, search<<16|descent)
    Resolve = 2,     // proposal arbitration shuffles, keyed by (step, target)
    Position = 3,    // population generation, keyed by neuron id
    GeometryTrial = 4, // randomized theorem trials, keyed by trial number
    Scenario = 5,    // general experiment-level streams
};

struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) {
        constexpr std::uint32_t m0 = 0xD2511F53u;
        constexpr std::uint32_t m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u;
        constexpr std::uint32_t w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
            ctr = { static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                    static_cast<std::uint32_t>(p1),
                    static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                    static_cast<std::uint32_t>(p0) };
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }
};

inline Philox4x32::Key split_seed(std::uint64_t seed) {
    return { static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32) };
}

// 64 random bits for the keyed tuple. The draw index shares the last counter
// word with the domain tag, so a single key supports 2^24 sequential draws.
inline std::uint64_t keyed_bits(std::uint64_t seed, RngDomain domain,
                                std::uint32_t a, std::uint32_t b, std::uint32_t c,
                                std::uint32_t draw_index = 0) {
    const Philox4x32::Counter ctr = {
        a, b, c,
        (static_cast<std::uint32_t>(domain) << 24) | (draw_index & 0x00FFFFFFu)
    };
    const auto out = Philox4x32::generate(ctr, split_seed(seed));
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline double bits_to_unit_double(std::uint64_t bits) {
    // 53-bit mantissa, uniform in [0, 1)
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double keyed_uniform(std::uint64_t seed, RngDomain domain,
                            std::uint32_t a, std::uint32_t b, std::uint32_t c,
                            std::uint32_t draw_index = 0) {
    return bits_to_unit_double(keyed_bits(seed, domain, a, b, c, draw_index));
}

// Sequential draws under a fixed key tuple.
class KeyedStream {
public:
    KeyedStream(std::uint64_t seed, RngDomain domain,
                std::uint32_t a, std::uint32_t b = 0, std::uint32_t c = 0)
        : seed_(seed), domain_(domain), a_(a), b_(b), c_(c) {}

    std::uint64_t next_bits() { return keyed_bits(seed_, domain_, a_, b_, c_, index_++); }

    double next_double() { return bits_to_unit_double(next_bits()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, bound) via the multiply-shift reduction.
    std::uint32_t next_index(std::uint32_t bound) {
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(next_bits()) * bound;
        return static_cast<std::uint32_t>(wide >> 64);
    }

private:
    std::uint64_t seed_;
    RngDomain domain_;
    std::uint32_t a_, b_, c_;
    std::uint32_t index_ = 0;
};

} // namespace plastree
