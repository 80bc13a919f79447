#pragma once

#include <cstdint>
#include <limits>

#include "qdeny/common.hpp"

namespace qdeny {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix2(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (b * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL));
}

/// Counter-based generator: output i is a fixed hash of (key, i). Streams
/// derived with `substream` are independent of how many values the parent drew.
class Rng {
   public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : key_(splitmix64(seed ^ 0x51D7348FA2C3B6E1ULL)) {
    }

    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        Rng r;
        r.key_ = mix2(splitmix64(seed ^ 0x51D7348FA2C3B6E1ULL), index + 1);
        return r;
    }

    Rng split(std::uint64_t index) const {
        Rng r;
        r.key_ = mix2(key_ ^ 0xA0761D6478BD642FULL, index);
        return r;
    }

    static constexpr result_type min() {
        return 0;
    }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() {
        return next_u64();
    }

    std::uint64_t next_u64() {
        return mix2(key_, counter_++);
    }

    unsigned bit() {
        return static_cast<unsigned>(next_u64() >> 63);
    }

    /// Uniform in [0, bound), bound > 0; unbiased by rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) {
            throw ParameterError("Rng::below bound must be positive");
        }
        std::uint64_t limit = max() - (max() % bound + 1) % bound;
        while (true) {
            std::uint64_t v = next_u64();
            if (v <= limit) {
                return v % bound;
            }
        }
    }

    /// Uniform bit string of the given width (≤ 128).
    Word bits(unsigned width) {
        Word w = (Word{next_u64()} << 64) | next_u64();
        return w & word_mask(width);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint64_t counter() const {
        return counter_;
    }

   private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace qdeny
