#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdeny/common.hpp"
#include "qdeny/rng.hpp"

namespace qdeny::tcf {

enum class Family { ExactClawFree, InjectiveTwin, LatticeNtcf };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::ExactClawFree: return "exact";
        case Family::InjectiveTwin: return "injective";
        case Family::LatticeNtcf: return "lattice";
    }
    return "unknown";
}

inline Family parse_family(const std::string &name) {
    if (name == "exact" || name == "ExactClawFree") return Family::ExactClawFree;
    if (name == "injective" || name == "InjectiveTwin") return Family::InjectiveTwin;
    if (name == "lattice" || name == "LatticeNtcf") return Family::LatticeNtcf;
    throw ParameterError("unknown family '" + name + "'");
}

inline constexpr unsigned kMinBits = 2;
inline constexpr unsigned kMaxBits = 24;
inline constexpr unsigned kTableBits = 12;

/// Four-round balanced Feistel network on 2h bits, restricted to an n-bit
/// domain by cycle walking. Small domains are tabulated.
class FeistelPermutation {
   public:
    FeistelPermutation() = default;
    FeistelPermutation(unsigned width, std::array<std::uint64_t, 4> round_keys) : width_(width), keys_(round_keys) {
        half_ = (width + 1) / 2;
        if (width <= kTableBits) {
            auto t = std::make_shared<Tables>();
            std::size_t size = std::size_t{1} << width;
            t->fwd.resize(size);
            t->inv.resize(size);
            for (std::size_t x = 0; x < size; x++) {
                auto y = walk_forward(x);
                t->fwd[x] = static_cast<std::uint32_t>(y);
                t->inv[y] = static_cast<std::uint32_t>(x);
            }
            tables_ = std::move(t);
        }
    }

    unsigned width() const {
        return width_;
    }
    const std::array<std::uint64_t, 4> &round_keys() const {
        return keys_;
    }

    std::uint64_t forward(std::uint64_t x) const {
        if (tables_) return tables_->fwd[x];
        return walk_forward(x);
    }

    std::uint64_t inverse(std::uint64_t y) const {
        if (tables_) return tables_->inv[y];
        std::uint64_t v = y;
        do {
            v = network_inverse(v);
        } while (v >> width_);
        return v;
    }

   private:
    struct Tables {
        std::vector<std::uint32_t> fwd, inv;
    };

    std::uint64_t round_fn(int r, std::uint64_t half_value) const {
        return splitmix64(keys_[r] ^ (half_value * 0x9E3779B97F4A7C15ULL)) & ((std::uint64_t{1} << half_) - 1);
    }

    std::uint64_t network(std::uint64_t v) const {
        std::uint64_t mask = (std::uint64_t{1} << half_) - 1;
        std::uint64_t left = v & mask, right = v >> half_;
        for (int r = 0; r < 4; r++) {
            std::uint64_t next = left ^ round_fn(r, right);
            left = right;
            right = next;
        }
        return left | (right << half_);
    }

    std::uint64_t network_inverse(std::uint64_t v) const {
        std::uint64_t mask = (std::uint64_t{1} << half_) - 1;
        std::uint64_t left = v & mask, right = v >> half_;
        for (int r = 3; r >= 0; r--) {
            std::uint64_t prev = right ^ round_fn(r, left);
            right = left;
            left = prev;
        }
        return left | (right << half_);
    }

    std::uint64_t walk_forward(std::uint64_t x) const {
        std::uint64_t v = x;
        do {
            v = network(v);
        } while (v >> width_);
        return v;
    }

    unsigned width_ = 0;
    unsigned half_ = 0;
    std::array<std::uint64_t, 4> keys_{};
    std::shared_ptr<const Tables> tables_;
};

/// Public key of a toy family. ExactClawFree: f_b(x) = P(x ⊕ b·s) on n bits.
/// InjectiveTwin: f_b(x) = P(x | b << n) on n+1 bits. Neither is hard to break.
struct TcfKey {
    Family family = Family::ExactClawFree;
    unsigned n = 0;
    FeistelPermutation perm;
    Word offset = 0;  // s for ExactClawFree (evaluation needs it), 0 otherwise

    unsigned image_bits() const {
        return family == Family::InjectiveTwin ? n + 1 : n;
    }

    std::vector<std::uint8_t> payload() const {
        std::vector<std::uint8_t> out;
        for (auto k : perm.round_keys()) {
            for (int i = 0; i < 8; i++) out.push_back(static_cast<std::uint8_t>(k >> (8 * i)));
        }
        for (int i = 0; i < 4; i++) out.push_back(static_cast<std::uint8_t>(offset >> (8 * i)));
        return out;
    }

    static TcfKey from_payload(Family family, unsigned n, const std::vector<std::uint8_t> &bytes) {
        if (family == Family::LatticeNtcf) throw ParameterError("lattice keys use lattice_ntcf serialization");
        if (n < kMinBits || n > kMaxBits) throw ParameterError("n outside [2, 24]");
        if (bytes.size() != 36) throw ParameterError("toy key payload must be 36 bytes");
        std::array<std::uint64_t, 4> keys{};
        for (int r = 0; r < 4; r++) {
            for (int i = 0; i < 8; i++) keys[r] |= std::uint64_t{bytes[8 * r + i]} << (8 * i);
        }
        Word offset = 0;
        for (int i = 0; i < 4; i++) offset |= Word{bytes[32 + i]} << (8 * i);
        TcfKey k;
        k.family = family;
        k.n = n;
        k.perm = FeistelPermutation(family == Family::InjectiveTwin ? n + 1 : n, keys);
        k.offset = offset;
        if (family == Family::ExactClawFree && (offset == 0 || (offset >> n) != 0)) {
            throw ParameterError("claw offset must be a nonzero n-bit string");
        }
        return k;
    }

    std::uint64_t id() const {
        std::uint64_t h = static_cast<std::uint64_t>(family) * 131 + n;
        for (auto b : payload()) h = mix2(h, b);
        return h;
    }
};

struct Trapdoor {
    std::uint64_t key_id = 0;
    TcfKey key;
    Word claw_offset = 0;
};

struct ClawPair {
    Word x0 = 0;
    Word x1 = 0;
    Word y = 0;
    bool operator==(const ClawPair &) const = default;
};

inline void check_bits(unsigned n) {
    if (n < kMinBits || n > kMaxBits) {
        throw ParameterError("preimage length n=" + std::to_string(n) + " outside [2, 24]");
    }
}

inline std::pair<TcfKey, Trapdoor> gen(Family family, unsigned n, std::uint64_t seed) {
    if (family == Family::LatticeNtcf) throw ParameterError("use lattice_ntcf::gen_trap for lattice keys");
    check_bits(n);
    Rng rng = Rng::substream(seed, 0x7C0F);
    std::array<std::uint64_t, 4> keys{};
    for (auto &k : keys) k = rng.next_u64();
    TcfKey key;
    key.family = family;
    key.n = n;
    key.perm = FeistelPermutation(family == Family::InjectiveTwin ? n + 1 : n, keys);
    if (family == Family::ExactClawFree) {
        do {
            key.offset = rng.bits(n);
        } while (key.offset == 0);
    }
    Trapdoor td{key.id(), key, key.offset};
    return {key, td};
}

inline Word eval(const TcfKey &k, unsigned b, Word x) {
    if ((x >> k.n) != 0) throw DomainError("preimage wider than n bits");
    b &= 1;
    if (k.family == Family::ExactClawFree) {
        return k.perm.forward(static_cast<std::uint64_t>(x ^ (b ? k.offset : 0)));
    }
    return k.perm.forward(static_cast<std::uint64_t>(x | (Word{b} << k.n)));
}

inline unsigned chk(const TcfKey &k, unsigned b, Word x, Word y) {
    if ((x >> k.n) != 0 || (y >> k.image_bits()) != 0) return 0;
    return eval(k, b, x) == y ? 1 : 0;
}

inline std::optional<Word> invert(const Trapdoor &td, unsigned b, Word y) {
    const TcfKey &k = td.key;
    if ((y >> k.image_bits()) != 0) return std::nullopt;
    Word pre = k.perm.inverse(static_cast<std::uint64_t>(y));
    if (k.family == Family::ExactClawFree) {
        return pre ^ ((b & 1) ? td.claw_offset : 0);
    }
    if (bit_of(pre, k.n) != (b & 1)) return std::nullopt;
    return pre & word_mask(k.n);
}

inline std::optional<Word> invert(const TcfKey &k, const Trapdoor &td, unsigned b, Word y) {
    if (td.key_id != k.id()) throw DomainError("trapdoor does not match key");
    return invert(td, b, y);
}

/// Joint (b, x) recovery for the injective twin.
inline std::optional<std::pair<unsigned, Word>> invert_joint(const Trapdoor &td, Word y) {
    if (td.key.family != Family::InjectiveTwin) throw DomainError("joint inversion needs an injective-twin trapdoor");
    for (unsigned b : {0u, 1u}) {
        if (auto x = invert(td, b, y)) return std::pair{b, *x};
    }
    return std::nullopt;
}

inline std::optional<ClawPair> claw_of(const Trapdoor &td, Word y) {
    if (td.key.family != Family::ExactClawFree) return std::nullopt;
    auto x0 = invert(td, 0, y);
    auto x1 = invert(td, 1, y);
    if (!x0 || !x1) return std::nullopt;
    return ClawPair{*x0, *x1, y};
}

}  // namespace qdeny::tcf
