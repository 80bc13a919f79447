#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdeny/common.hpp"
#include "qdeny/distances.hpp"
#include "qdeny/family.hpp"
#include "qdeny/qsim.hpp"
#include "qdeny/rng.hpp"

namespace qdeny::deniable {

struct DeniableCiphertext {
    unsigned z = 0;  // emitted bit: raw Hadamard outcome ⊕ m
    Word d = 0;
    Image y;
};

struct EncOptions {
    bool full_path = false;  // materialize Samp and measure Y instead of sampling the collapsed branch
    bool keep_leftover = true;
};

struct EncResult {
    DeniableCiphertext c;
    unsigned z_raw = 0;
    /// State on (B, X) after only the z qubit is measured; absent when too wide.
    std::optional<SparseState> leftover;
};

inline constexpr unsigned kLeftoverMaxBits = 20;

inline RegisterLayout enc_layout(const PublicKey &pk) {
    return RegisterLayout{{"B", 1}, {"X", pk.preimage_bits()}};
}

/// Collapsed (B, X) state after the image measurement.
inline std::pair<Image, SparseState> collapsed_state(const PublicKey &pk, const SecretKey *sim, Rng &rng, bool full_path) {
    auto layout = enc_layout(pk);
    if (!full_path) {
        auto cb = sample_collapsed(pk, sim, rng);
        return {cb.y, load_branch(SparseState::basis_state(layout), cb, "B", "X")};
    }
    if (pk.is_lattice()) throw ParameterError("full path supports toy families only");
    RegisterLayout wide = layout;
    wide.add("Y", pk.toy.image_bits());
    auto samp = prepare_range_superposition(pk, wide);
    auto meas = qsim::measure(samp, "Y", rng);
    SparseState out(layout);
    for (const auto &[b, a] : meas.post_state.entries()) {
        Word regs = layout.set(layout.set(0, "B", wide.get(b.regs, "B")), "X", wide.get(b.regs, "X"));
        out.add(Basis{regs, {}}, a);
    }
    return {Image{static_cast<std::int64_t>(meas.value)}, out};
}

/// Enc: Samp on uniform b, measure y, Hadamard on (b, x), measure z‖d.
/// `sim` only helps the simulator write down the collapsed state; it never
/// influences the distribution of the output.
inline EncResult den_enc(unsigned m, const PublicKey &pk, const SecretKey *sim, Rng &rng, EncOptions opt = {}) {
    auto [y, state] = collapsed_state(pk, sim, rng, opt.full_path);
    EncResult r;
    r.c.y = y;
    if (opt.keep_leftover && pk.preimage_bits() + 1 <= kLeftoverMaxBits) {
        auto h = qsim::hadamard_all(state, {"B", "X"});
        auto z = qsim::measure(h, "B", rng);
        r.z_raw = static_cast<unsigned>(z.value);
        auto d = qsim::measure(z.post_state, "X", rng);
        r.c.d = d.value;
        r.leftover = std::move(z.post_state);
    } else {
        auto hm = qsim::measure_hadamard(state, {"B", "X"}, rng);
        r.z_raw = static_cast<unsigned>(hm.values[0]);
        r.c.d = hm.values[1];
    }
    r.c.z = r.z_raw ^ (m & 1);
    return r;
}

inline EncResult den_enc(unsigned m, const SecretKey &sk, Rng &rng, EncOptions opt = {}) {
    return den_enc(m, sk.pk, &sk, rng, opt);
}

/// m = z ⊕ d·(x0 ⊕ x1); ⊥ when y has no claw under the trapdoor.
inline std::optional<unsigned> den_dec(const DeniableCiphertext &c, const SecretKey &sk) {
    auto claw = claw_of(sk, c.y);
    if (!claw) return std::nullopt;
    return c.z ^ parity(c.d & (claw->x0 ^ claw->x1));
}

/// Fake leaves the workspace untouched.
inline std::pair<unsigned, SparseState> den_fake(unsigned m_claim, const SparseState &leftover) {
    return {m_claim, leftover};
}

struct ConditionalStates {
    /// Per image y: probability of y given z, and the residual pure state on X.
    std::map<Image, std::pair<double, SparseState>> by_image;
    double z_probability = 0;
};

/// Trace distance between the two classical-quantum states
/// Σ_y p(y) |y⟩⟨y| ⊗ |φ_y⟩⟨φ_y| and Σ_y q(y) |y⟩⟨y| ⊗ |χ_y⟩⟨χ_y|.
inline double cq_trace_distance(const ConditionalStates &a, const ConditionalStates &b) {
    KahanSum total;
    auto block = [&](double p, double q, double overlap_sq) {
        double v = (p + q) * (p + q) - 4 * p * q * overlap_sq;
        return std::sqrt(std::max(0.0, v));
    };
    for (const auto &[y, pa] : a.by_image) {
        auto it = b.by_image.find(y);
        if (it == b.by_image.end()) {
            total += pa.first;
        } else {
            double ov = std::norm(inner_product(pa.second, it->second.second));
            total += block(pa.first, it->second.first, ov);
        }
    }
    for (const auto &[y, pb] : b.by_image) {
        if (a.by_image.find(y) == a.by_image.end()) total += pb.first;
    }
    return std::clamp(0.5 * total.value(), 0.0, 1.0);
}

/// Residual states of an honest encryption of m conditioned on the emitted z,
/// enumerating every image exactly. The image is measured during Enc, so it
/// stays classical. With `dual_basis` the final Hadamard on X is skipped; it
/// is a fixed unitary on the residual register and preserves trace distances.
inline std::array<ConditionalStates, 2> conditional_states(const SecretKey &sk, unsigned m, bool dual_basis = true) {
    const auto &pk = sk.pk;
    if (pk.is_lattice()) throw ParameterError("exact conditional states need a toy key");
    unsigned n = pk.toy.n;
    if (n > 16) throw ParameterError("exact conditional states limited to n ≤ 16");
    std::map<Word, std::vector<std::pair<unsigned, Word>>> preimages;
    for (unsigned b : {0u, 1u}) {
        for (Word x = 0; x < (Word{1} << n); x++) preimages[tcf::eval(pk.toy, b, x)].emplace_back(b, x);
    }
    double total = 2.0 * static_cast<double>(Word{1} << n);
    auto layout = enc_layout(pk);
    std::array<ConditionalStates, 2> out;
    for (const auto &[y, pre] : preimages) {
        SparseState s(layout);
        double a = 1.0 / std::sqrt(static_cast<double>(pre.size()));
        for (auto [b, x] : pre) s.add(Basis{layout.set(layout.set(0, "B", b), "X", x), {}}, a);
        auto h = dual_basis ? qsim::hadamard_all(s, {"B"}) : qsim::hadamard_all(s, {"B", "X"});
        double py = static_cast<double>(pre.size()) / total;
        for (unsigned z_raw : {0u, 1u}) {
            auto proj = qsim::project(h, "B", z_raw);
            if (proj.norm_sq < kPruneEps) continue;
            unsigned z = z_raw ^ (m & 1);
            proj.state.normalize();
            out[z].by_image.emplace(Image{static_cast<std::int64_t>(y)}, std::pair{py * proj.norm_sq, proj.state});
            out[z].z_probability += py * proj.norm_sq;
        }
    }
    for (auto &cs : out) {
        for (auto &[y, entry] : cs.by_image) entry.first /= cs.z_probability;
        // The measured qubit itself is not part of the residual.
        for (auto &[y, entry] : cs.by_image) {
            SparseState stripped(layout);
            for (const auto &[b, amp] : entry.second.entries()) stripped.add(Basis{layout.set(b.regs, "B", 0), b.db}, amp);
            entry.second = std::move(stripped);
        }
    }
    return out;
}

struct DeniabilityReport {
    tcf::Family family = tcf::Family::InjectiveTwin;
    unsigned n = 0;
    std::size_t trials = 0;
    std::vector<double> trace_distances;  // per key, max over m
    double max_trace_distance = 0;
    double min_trace_distance = 1;
    bool supports_partitioned = true;  // exact family: z selects disjoint (d, y) blocks
    bool passed = false;
};

inline double deniability_trace_distance(const SecretKey &sk, unsigned m) {
    auto cs = conditional_states(sk, m);
    return cq_trace_distance(cs[0], cs[1]);
}

/// For each key, trace distance between the residual states conditioned on
/// z = 0 and z = 1. Injective keys must give 0; exact keys give 1 (the
/// computational indistinguishability of the two key families is assumed, not tested).
inline DeniabilityReport deniability_experiment(tcf::Family family, unsigned n, std::size_t trials, std::uint64_t seed,
                                                const std::function<void(std::size_t, const std::function<void(std::size_t)> &)> &for_each = {}) {
    DeniabilityReport rep;
    rep.family = family;
    rep.n = n;
    rep.trials = trials;
    rep.trace_distances.assign(trials, 0.0);
    auto body = [&](std::size_t t) {
        auto sk = keygen(family, n, mix2(seed, t));
        double td = 0;
        for (unsigned m : {0u, 1u}) td = std::max(td, deniability_trace_distance(sk, m));
        rep.trace_distances[t] = td;
    };
    if (for_each) {
        for_each(trials, body);
    } else {
        for (std::size_t t = 0; t < trials; t++) body(t);
    }
    for (double td : rep.trace_distances) {
        rep.max_trace_distance = std::max(rep.max_trace_distance, td);
        rep.min_trace_distance = std::min(rep.min_trace_distance, td);
    }
    if (family == tcf::Family::InjectiveTwin) {
        rep.passed = rep.max_trace_distance <= 1e-10;
    } else {
        rep.supports_partitioned = rep.min_trace_distance >= 1.0 - 1e-10;
        rep.passed = rep.supports_partitioned;
    }
    return rep;
}

}  // namespace qdeny::deniable
