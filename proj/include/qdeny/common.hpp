#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qdeny {

// Bit strings up to 128 bits, little-endian: bit i of the string is bit i of the word.
using Word = unsigned __int128;

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

inline constexpr Word word_mask(unsigned width) {
    return width >= 128 ? ~Word{0} : ((Word{1} << width) - 1);
}

inline int popcount(Word w) {
    return std::popcount(static_cast<std::uint64_t>(w)) + std::popcount(static_cast<std::uint64_t>(w >> 64));
}

inline unsigned parity(Word w) {
    return static_cast<unsigned>(popcount(w) & 1);
}

inline unsigned bit_of(Word w, unsigned i) {
    return static_cast<unsigned>((w >> i) & 1);
}

inline std::size_t hash_word(Word w) {
    auto lo = static_cast<std::uint64_t>(w);
    auto hi = static_cast<std::uint64_t>(w >> 64);
    std::uint64_t h = lo * 0x9E3779B97F4A7C15ULL;
    h ^= (hi + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2));
    return static_cast<std::size_t>(h);
}

/// Hex encoding of the low `width` bits. Byte j holds bits 8j..8j+7, bytes in
/// increasing order, so "0100" is the 16-bit string with only bit 0 set.
inline std::string to_hex(Word w, unsigned width) {
    static const char *digits = "0123456789abcdef";
    unsigned bytes = (width + 7) / 8;
    if (bytes == 0) {
        bytes = 1;
    }
    std::string out;
    out.reserve(2 * bytes);
    for (unsigned j = 0; j < bytes; j++) {
        auto byte = static_cast<unsigned>((w >> (8 * j)) & 0xFF);
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0xF]);
    }
    return out;
}

inline Word from_hex(std::string_view hex, unsigned width) {
    if (hex.size() % 2 != 0 || hex.size() > 32) {
        throw ParameterError("bad hex bit string length: " + std::string(hex));
    }
    auto nibble = [&](char c) -> unsigned {
        if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
        throw ParameterError("bad hex digit in: " + std::string(hex));
    };
    Word w = 0;
    for (std::size_t j = 0; j < hex.size() / 2; j++) {
        Word byte = (nibble(hex[2 * j]) << 4) | nibble(hex[2 * j + 1]);
        w |= byte << (8 * j);
    }
    if ((w & ~word_mask(width)) != 0) {
        throw ParameterError("hex bit string wider than " + std::to_string(width) + " bits");
    }
    return w;
}

inline std::string bytes_to_hex(const std::vector<std::uint8_t> &bytes) {
    static const char *digits = "0123456789abcdef";
    std::string out;
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

inline std::vector<std::uint8_t> hex_to_bytes(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        throw ParameterError("odd-length hex payload");
    }
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t j = 0; j < hex.size(); j += 2) {
        out.push_back(static_cast<std::uint8_t>(from_hex(hex.substr(j, 2), 8)));
    }
    return out;
}

/// Compensated summation (Neumaier variant).
class KahanSum {
   public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    KahanSum &operator+=(double v) {
        add(v);
        return *this;
    }
    double value() const {
        return sum_ + comp_;
    }

   private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace qdeny
