#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qdeny/common.hpp"
#include "qdeny/rng.hpp"
#include "qdeny/state.hpp"

namespace qdeny::qsim {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

using Matrix2 = std::array<Amplitude, 4>;  // row-major

struct MeasurementOutcome {
    std::string reg;
    Word value = 0;
    double probability = 0;
    SparseState post_state;
};

struct Projection {
    SparseState state;
    double norm_sq = 0;
};

/// Absolute bit positions of the named registers, in order.
inline std::vector<unsigned> bit_positions(const RegisterLayout &layout, const std::vector<std::string> &regs) {
    std::vector<unsigned> out;
    for (const auto &name : regs) {
        const auto &r = layout.at(name);
        for (unsigned i = 0; i < r.width; i++) {
            out.push_back(r.offset + i);
        }
    }
    return out;
}

inline SparseState apply_hadamard_bit(const SparseState &s, unsigned pos) {
    SparseState out(s.layout());
    Word m = Word{1} << pos;
    for (const auto &[b, a] : s.entries()) {
        Amplitude h = a * kInvSqrt2;
        Basis b0{b.regs & ~m, b.db};
        Basis b1{b.regs | m, b.db};
        out.add(b0, h);
        out.add(b1, (b.regs & m) ? -h : h);
    }
    out.prune();
    return out;
}

/// H on every qubit of the listed registers.
inline SparseState hadamard_all(const SparseState &s, const std::vector<std::string> &regs) {
    SparseState cur = s;
    for (unsigned pos : bit_positions(s.layout(), regs)) {
        cur = apply_hadamard_bit(cur, pos);
    }
    return cur;
}

inline SparseState apply_single_qubit(const SparseState &s, const std::string &reg, unsigned bit, const Matrix2 &u) {
    const auto &r = s.layout().at(reg);
    if (bit >= r.width) throw DomainError("qubit index outside register '" + reg + "'");
    Word m = Word{1} << (r.offset + bit);
    SparseState out(s.layout());
    for (const auto &[b, a] : s.entries()) {
        unsigned col = (b.regs & m) ? 1 : 0;
        out.add(Basis{b.regs & ~m, b.db}, u[0 * 2 + col] * a);
        out.add(Basis{b.regs | m, b.db}, u[1 * 2 + col] * a);
    }
    out.prune();
    return out;
}

/// Classical reversible relabeling of basis states. `fn` must be a bijection
/// on the populated labels.
inline SparseState apply_permutation(const SparseState &s, const std::function<Basis(const Basis &)> &fn) {
    SparseState out(s.layout());
    for (const auto &[b, a] : s.entries()) {
        out.add(fn(b), a);
    }
    if (out.size() != s.size()) throw DomainError("relabeling is not injective on the state");
    return out;
}

inline SparseState apply_cnot(const SparseState &s, const std::string &ctrl_reg, unsigned ctrl_bit, const std::string &tgt_reg, unsigned tgt_bit) {
    const auto &c = s.layout().at(ctrl_reg);
    const auto &t = s.layout().at(tgt_reg);
    Word cm = Word{1} << (c.offset + ctrl_bit);
    Word tm = Word{1} << (t.offset + tgt_bit);
    if (cm == tm) throw DomainError("cnot control equals target");
    return apply_permutation(s, [&](const Basis &b) {
        return (b.regs & cm) ? Basis{b.regs ^ tm, b.db} : b;
    });
}

/// reg ^= value on every branch.
inline SparseState xor_value(const SparseState &s, const std::string &reg, Word value) {
    const auto &r = s.layout().at(reg);
    Word m = (value & word_mask(r.width)) << r.offset;
    return apply_permutation(s, [&](const Basis &b) { return Basis{b.regs ^ m, b.db}; });
}

/// Multiplies each amplitude by `phase(basis)`.
inline SparseState apply_phase(const SparseState &s, const std::function<Amplitude(const Basis &)> &phase) {
    SparseState out = s;
    for (auto &[b, a] : out.entries()) {
        a *= phase(b);
    }
    return out;
}

inline Projection project(const SparseState &s, const std::string &reg, Word value) {
    Projection p{SparseState(s.layout()), 0};
    for (const auto &[b, a] : s.entries()) {
        if (s.layout().get(b.regs, reg) == value) {
            p.state.entries().emplace(b, a);
        }
    }
    p.norm_sq = p.state.norm_sq();
    return p;
}

inline MeasurementOutcome measure(const SparseState &s, const std::string &reg, Rng &rng) {
    std::map<Word, KahanSum> weights;
    for (const auto &[b, a] : s.entries()) {
        weights[s.layout().get(b.regs, reg)] += std::norm(a);
    }
    if (weights.empty()) throw DomainError("measuring the zero state");
    KahanSum total;
    for (auto &[v, w] : weights) total += w.value();
    double u = rng.uniform01() * total.value();
    Word chosen = weights.rbegin()->first;
    KahanSum run;
    for (auto &[v, w] : weights) {
        run += w.value();
        if (u < run.value() && w.value() > 0) {
            chosen = v;
            break;
        }
    }
    auto p = project(s, reg, chosen);
    MeasurementOutcome out{reg, chosen, p.norm_sq / total.value(), std::move(p.state)};
    out.post_state.normalize();
    return out;
}

struct HadamardMeasurement {
    std::vector<Word> values;  // one per register, in request order
    double probability = 0;
    SparseState post_state;
};

/// Samples the outcome of hadamard_all(regs) followed by a computational-basis
/// measurement of regs, without materializing the 2^w-branch intermediate
/// state. Bits are drawn one at a time from exact conditional marginals.
inline HadamardMeasurement measure_hadamard(const SparseState &s, const std::vector<std::string> &regs, Rng &rng) {
    auto pos = bit_positions(s.layout(), regs);
    Word target = 0;
    for (unsigned p : pos) target |= Word{1} << p;
    Word outcome = 0;
    double prob = 1.0;
    for (std::size_t j = 0; j < pos.size(); j++) {
        // Positions pos[0..j] are being measured; group by everything else.
        Word cleared = 0;
        for (std::size_t i = 0; i <= j; i++) cleared |= Word{1} << pos[i];
        std::array<std::map<Basis, Amplitude>, 2> acc;
        for (const auto &[b, a] : s.entries()) {
            Word prefix_hits = b.regs & cleared & outcome;
            unsigned sign0 = parity(prefix_hits);
            unsigned sign1 = sign0 ^ bit_of(b.regs, pos[j]);
            Basis key{b.regs & ~cleared, b.db};
            acc[0][key] += sign0 ? -a : a;
            acc[1][key] += sign1 ? -a : a;
        }
        std::array<double, 2> w{};
        for (int c = 0; c < 2; c++) {
            KahanSum k;
            for (const auto &[key, a] : acc[c]) k += std::norm(a);
            w[c] = k.value();
        }
        double total = w[0] + w[1];
        if (!(total > 0)) throw DomainError("measuring the zero state");
        unsigned c = rng.uniform01() * total < w[0] ? 0 : 1;
        if (w[c] <= 0) c ^= 1;
        prob *= w[c] / total;
        if (c) outcome |= Word{1} << pos[j];
    }
    SparseState post(s.layout());
    for (const auto &[b, a] : s.entries()) {
        unsigned sign = parity(b.regs & outcome);
        post.add(Basis{(b.regs & ~target) | outcome, b.db}, sign ? -a : a);
    }
    post.prune();
    post.normalize();
    HadamardMeasurement out{{}, prob, std::move(post)};
    for (const auto &r : regs) out.values.push_back(s.layout().get(outcome, r));
    return out;
}

/// Phase oracle with a concrete function H: amplitude *= (−1)^{e·H(x)}.
inline SparseState phase_query_concrete(const SparseState &s, const std::function<unsigned(Word)> &h, const std::string &x_reg, const std::string &e_reg) {
    const auto &layout = s.layout();
    return apply_phase(s, [&](const Basis &b) -> Amplitude {
        Word e = layout.get(b.regs, e_reg);
        if (e == 0) return 1.0;
        return (h(layout.get(b.regs, x_reg)) & 1) ? -1.0 : 1.0;
    });
}

/// Random 2×2 unitary from three Euler angles and a global phase.
inline Matrix2 random_unitary(Rng &rng) {
    const double two_pi = 6.283185307179586;
    double theta = std::acos(1.0 - 2.0 * rng.uniform01()) / 2.0;
    double phi = two_pi * rng.uniform01();
    double lambda = two_pi * rng.uniform01();
    double g = two_pi * rng.uniform01();
    Amplitude gp = std::polar(1.0, g);
    double c = std::cos(theta), sn = std::sin(theta);
    return {gp * c, -gp * std::polar(sn, lambda), gp * std::polar(sn, phi), gp * std::polar(c, phi + lambda)};
}

}  // namespace qdeny::qsim
