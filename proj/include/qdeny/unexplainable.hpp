#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdeny/common.hpp"
#include "qdeny/compressed_oracle.hpp"
#include "qdeny/family.hpp"
#include "qdeny/qsim.hpp"
#include "qdeny/rng.hpp"

namespace qdeny::unexp {

inline constexpr unsigned kMaxRepetitionsCompressed = 4;
inline constexpr unsigned kMaxRepetitionsConcrete = 16;

/// A uniformly sampled H: {0,1}^n → {0,1}, realized as a keyed hash so that
/// wide inputs need no table.
struct ConcreteOracle {
    std::uint64_t seed = 0;
    unsigned operator()(Word x) const {
        return static_cast<unsigned>(mix2(mix2(seed, static_cast<std::uint64_t>(x)), static_cast<std::uint64_t>(x >> 64)) & 1);
    }
};

using OracleFn = std::function<unsigned(Word)>;

struct ParallelCiphertext {
    std::vector<unsigned> z_prime;
    std::vector<Word> d;
    std::vector<Image> y;

    std::size_t size() const {
        return z_prime.size();
    }
    bool consistent() const {
        return d.size() == z_prime.size() && y.size() == z_prime.size();
    }
};

enum class OracleMode { Compressed, Concrete };

struct EncResult {
    ParallelCiphertext c;
    /// Compressed mode: database superposition with all work registers reset.
    SparseState final_state;
    std::size_t queries = 0;
};

inline RegisterLayout work_layout(const PublicKey &pk) {
    return RegisterLayout{{"B", 1}, {"X", pk.preimage_bits()}, {"E", 1}};
}

/// L repetitions sharing one key and one oracle: Samp, measure y_i, query
/// H in phase form, Hadamard on (b, x), measure z_i‖d_i, emit z_i ⊕ m.
inline EncResult unexp_enc(unsigned m, const PublicKey &pk, const SecretKey *sim, OracleMode mode, const OracleFn &h, unsigned L, Rng &rng) {
    unsigned cap = mode == OracleMode::Compressed ? kMaxRepetitionsCompressed : kMaxRepetitionsConcrete;
    if (L == 0 || L > cap) throw ParameterError("repetition count outside [1, " + std::to_string(cap) + "]");
    auto layout = work_layout(pk);
    oracle::CompressedOracle cpho(L);
    SparseState state = SparseState::basis_state(layout);
    EncResult r;
    for (unsigned i = 0; i < L; i++) {
        auto cb = sample_collapsed(pk, sim, rng);
        state = load_branch(state, cb, "B", "X");
        state = qsim::xor_value(state, "E", 1);
        if (mode == OracleMode::Compressed) {
            state = cpho.phase_query(state, "X", "E");
        } else {
            state = qsim::phase_query_concrete(state, h, "X", "E");
        }
        auto hm = qsim::measure_hadamard(state, {"B", "X"}, rng);
        unsigned z = static_cast<unsigned>(hm.values[0]);
        Word d = hm.values[1];
        state = qsim::xor_value(qsim::xor_value(qsim::xor_value(hm.post_state, "B", z), "X", d), "E", 1);
        r.c.z_prime.push_back(z ^ (m & 1));
        r.c.d.push_back(d);
        r.c.y.push_back(cb.y);
    }
    r.final_state = std::move(state);
    r.queries = cpho.issued();
    return r;
}

inline EncResult unexp_enc(unsigned m, const SecretKey &sk, OracleMode mode, const OracleFn &h, unsigned L, Rng &rng) {
    return unexp_enc(m, sk.pk, &sk, mode, h, L, rng);
}

struct DecResult {
    std::optional<unsigned> m;
    std::vector<unsigned> per_repetition;
    std::string diagnostic;
};

/// m_i = z'_i ⊕ d_i·(x0 ⊕ x1) ⊕ H(x0) ⊕ H(x1); unanimous m_i or ⊥.
inline DecResult unexp_dec(const ParallelCiphertext &c, const SecretKey &sk, const OracleFn &h) {
    DecResult r;
    if (!c.consistent() || c.size() == 0) {
        r.diagnostic = "malformed ciphertext";
        return r;
    }
    for (std::size_t i = 0; i < c.size(); i++) {
        auto claw = claw_of(sk, c.y[i]);
        if (!claw) {
            r.diagnostic = "inversion failed at repetition " + std::to_string(i);
            return r;
        }
        unsigned mi = c.z_prime[i] ^ parity(c.d[i] & (claw->x0 ^ claw->x1)) ^ h(claw->x0) ^ h(claw->x1);
        r.per_repetition.push_back(mi);
    }
    for (auto mi : r.per_repetition) {
        if (mi != r.per_repetition[0]) {
            r.diagnostic = "repetitions disagree";
            return r;
        }
    }
    r.m = r.per_repetition[0];
    return r;
}

/// Both preimages of every y_i plus where each repetition's z and d live:
/// either named registers of the state or classical values.
struct EquationContext {
    std::vector<std::optional<Claw>> claws;
    std::vector<std::string> z_regs, d_regs;
    std::vector<unsigned> z_values;
    std::vector<Word> d_values;
    unsigned z_offset = 0;  // stored z ⊕ z_offset is the raw Hadamard outcome

    std::size_t size() const {
        return claws.size();
    }

    unsigned z_raw(const RegisterLayout &layout, const Basis &b, std::size_t i) const {
        unsigned z = z_regs.empty() ? z_values.at(i) : static_cast<unsigned>(layout.get(b.regs, z_regs.at(i)));
        return z ^ z_offset;
    }
    Word d(const RegisterLayout &layout, const Basis &b, std::size_t i) const {
        return d_regs.empty() ? d_values.at(i) : layout.get(b.regs, d_regs.at(i));
    }

    std::vector<Word> relevant_points() const {
        std::vector<Word> out;
        for (const auto &c : claws) {
            if (c) {
                out.push_back(c->x0);
                out.push_back(c->x1);
            }
        }
        return out;
    }
};

inline EquationContext context_for(const ParallelCiphertext &c, const SecretKey &sk, unsigned m) {
    EquationContext ctx;
    for (std::size_t i = 0; i < c.size(); i++) ctx.claws.push_back(claw_of(sk, c.y[i]));
    ctx.z_values = c.z_prime;
    ctx.d_values = c.d;
    ctx.z_offset = m & 1;
    return ctx;
}

enum class Pattern { Neither, Zero, One, Both };

inline Pattern classify(const Database &db, const Claw &claw) {
    bool has0 = db.contains(claw.x0), has1 = db.contains(claw.x1);
    if (has0 && has1) return Pattern::Both;
    if (has0) return Pattern::Zero;
    if (has1) return Pattern::One;
    return Pattern::Neither;
}

struct ProjectorSpec {
    enum class Kind { Valid, NoClaw, AtMost, PreimagePattern };
    Kind kind = Kind::Valid;
    unsigned l = 0;                  // AtMost
    std::vector<unsigned> indices;   // PreimagePattern: I
    std::vector<Pattern> pattern;    // PreimagePattern: b_I

    static ProjectorSpec valid() {
        return {Kind::Valid, 0, {}, {}};
    }
    static ProjectorSpec no_claw() {
        return {Kind::NoClaw, 0, {}, {}};
    }
    static ProjectorSpec at_most(unsigned l) {
        return {Kind::AtMost, l, {}, {}};
    }
    static ProjectorSpec preimage_pattern(std::vector<unsigned> I, std::vector<Pattern> b) {
        if (I.size() != b.size()) throw DomainError("pattern length differs from index set");
        return {Kind::PreimagePattern, 0, std::move(I), std::move(b)};
    }
};

/// Equation i on a basis entry; the database must specify both preimages.
inline bool equation_holds(const EquationContext &ctx, const RegisterLayout &layout, const Basis &b, std::size_t i) {
    const auto &claw = ctx.claws.at(i);
    if (!claw) return false;
    const auto *e0 = b.db.find(claw->x0);
    const auto *e1 = b.db.find(claw->x1);
    if (e0 == nullptr || e1 == nullptr) throw DomainError("validity needs a database decompressed at both preimages");
    unsigned lhs = ctx.z_raw(layout, b, i) ^ parity(ctx.d(layout, b, i) & (claw->x0 ^ claw->x1));
    return lhs == static_cast<unsigned>(e0->v ^ e1->v);
}

inline bool projector_accepts(const ProjectorSpec &spec, const EquationContext &ctx, const RegisterLayout &layout, const Basis &b) {
    switch (spec.kind) {
        case ProjectorSpec::Kind::Valid:
            for (std::size_t i = 0; i < ctx.size(); i++) {
                if (!equation_holds(ctx, layout, b, i)) return false;
            }
            return true;
        case ProjectorSpec::Kind::NoClaw:
            for (const auto &c : ctx.claws) {
                if (c && classify(b.db, *c) == Pattern::Both) return false;
            }
            return true;
        case ProjectorSpec::Kind::AtMost: {
            unsigned hits = 0;
            for (const auto &c : ctx.claws) {
                if (c && classify(b.db, *c) != Pattern::Neither) hits++;
            }
            return hits <= spec.l;
        }
        case ProjectorSpec::Kind::PreimagePattern:
            for (std::size_t j = 0; j < spec.indices.size(); j++) {
                const auto &c = ctx.claws.at(spec.indices[j]);
                Pattern p = c ? classify(b.db, *c) : Pattern::Neither;
                if (p != spec.pattern[j]) return false;
            }
            return true;
    }
    return false;
}

inline qsim::Projection apply_projector(const ProjectorSpec &spec, const EquationContext &ctx, const SparseState &s) {
    qsim::Projection p{SparseState(s.layout()), 0};
    for (const auto &[b, a] : s.entries()) {
        if (projector_accepts(spec, ctx, s.layout(), b)) p.state.entries().emplace(b, a);
    }
    p.norm_sq = p.state.norm_sq();
    return p;
}

/// ‖Π_valid DecompAll ψ‖².
inline double validity(const SparseState &s, const EquationContext &ctx) {
    return apply_projector(ProjectorSpec::valid(), ctx, oracle::decomp_all(s, ctx.relevant_points())).norm_sq;
}

/// Probability that equation i alone holds.
inline double equation_validity(const SparseState &s, const EquationContext &ctx, std::size_t i) {
    auto dec = oracle::decomp_all(s, ctx.relevant_points());
    KahanSum w;
    for (const auto &[b, a] : dec.entries()) {
        if (equation_holds(ctx, dec.layout(), b, i)) w += std::norm(a);
    }
    return w.value();
}

}  // namespace qdeny::unexp
