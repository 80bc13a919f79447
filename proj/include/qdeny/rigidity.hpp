#pragma once

#include <array>
#include <cmath>
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
#include "qdeny/state.hpp"
#include "qdeny/unexplainable.hpp"

namespace qdeny::rigidity {

using unexp::EquationContext;
using unexp::Pattern;
using unexp::ProjectorSpec;

inline std::string z_reg(unsigned i) {
    return "Z" + std::to_string(i);
}
inline std::string d_reg(unsigned i) {
    return "D" + std::to_string(i);
}
inline std::string a_reg(unsigned i) {
    return "A" + std::to_string(i);
}

/// Per repetition: Z{i} (1 bit) and D{i} (n bits) hold the (b, x) registers
/// before the Hadamard and (z, d) after it. E is the phase-query control and
/// W a coin. The verifier adds A{i}, VX and Q.
inline RegisterLayout prover_layout(unsigned n, unsigned L, bool verifier) {
    RegisterLayout layout;
    for (unsigned i = 0; i < L; i++) {
        layout.add(z_reg(i), 1);
        layout.add(d_reg(i), n);
    }
    layout.add("E", 1);
    layout.add("W", 1);
    if (verifier) {
        for (unsigned i = 0; i < L; i++) layout.add(a_reg(i), 1);
        layout.add("VX", n);
        layout.add("Q", 1);
    }
    return layout;
}

enum class StrategyKind { Honest, NoQueryGuess, PartialQuery, Mixture, Custom };

/// A custom repetition step: receives the state with Z{i}, D{i} at zero and
/// must leave the pre-Hadamard content there. Queries go through `oracle`.
using CustomStep = std::function<SparseState(const SparseState &, unsigned rep, const CollapsedBranch &, oracle::CompressedOracle &)>;

struct ProverStrategy {
    StrategyKind kind = StrategyKind::Honest;
    unsigned l = 0;  // PartialQuery: honest on repetitions [0, l)
    CustomStep custom;
    std::string custom_name = "custom";

    static ProverStrategy honest() {
        return {StrategyKind::Honest, 0, {}, {}};
    }
    static ProverStrategy no_query() {
        return {StrategyKind::NoQueryGuess, 0, {}, {}};
    }
    static ProverStrategy partial(unsigned l) {
        return {StrategyKind::PartialQuery, l, {}, {}};
    }
    static ProverStrategy mixture() {
        return {StrategyKind::Mixture, 0, {}, {}};
    }
    static ProverStrategy custom_step(std::string name, CustomStep step) {
        return {StrategyKind::Custom, 0, std::move(step), std::move(name)};
    }

    std::string name() const {
        switch (kind) {
            case StrategyKind::Honest:
                return "honest";
            case StrategyKind::NoQueryGuess:
                return "noquery";
            case StrategyKind::PartialQuery:
                return "partial:" + std::to_string(l);
            case StrategyKind::Mixture:
                return "mixture";
            case StrategyKind::Custom:
                return custom_name;
        }
        return "?";
    }

    static ProverStrategy parse(const std::string &s) {
        if (s == "honest") return honest();
        if (s == "noquery") return no_query();
        if (s == "mixture") return mixture();
        if (s.rfind("partial:", 0) == 0) {
            try {
                std::size_t used = 0;
                int l = std::stoi(s.substr(8), &used);
                if (l >= 0 && used == s.size() - 8) return partial(static_cast<unsigned>(l));
            } catch (const std::exception &) {
            }
        }
        throw ParameterError("unknown strategy '" + s + "' (honest|noquery|mixture|partial:l)");
    }

    /// Repetitions with an oracle query; the mixture counts its honest branch.
    unsigned queries(unsigned L) const {
        switch (kind) {
            case StrategyKind::Honest:
            case StrategyKind::Mixture:
                return L;
            case StrategyKind::PartialQuery:
                return std::min(l, L);
            default:
                return 0;
        }
    }
};

enum class RunMode {
    Coherent,  // state just before the z, d measurement
    Measured   // z, d measured and kept in their registers
};

struct ProverRun {
    SparseState state;
    std::vector<CollapsedBranch> samples;
    EquationContext ctx;
    oracle::CompressedOracle oracle{0};
    unsigned n = 0;
    unsigned L = 0;
};

namespace detail {

inline SparseState honest_step(const SparseState &s, unsigned i, const CollapsedBranch &cb, oracle::CompressedOracle &o) {
    auto t = load_branch(s, cb, z_reg(i), d_reg(i));
    t = qsim::xor_value(t, "E", 1);
    t = o.phase_query(t, d_reg(i), "E");
    return qsim::xor_value(t, "E", 1);
}

/// Applies `step` only to the part of the state where `reg` equals `value`.
inline SparseState controlled(const SparseState &s, const std::string &reg, Word value, const std::function<SparseState(const SparseState &)> &step) {
    SparseState on(s.layout()), off(s.layout());
    for (const auto &[b, a] : s.entries()) {
        (s.layout().get(b.regs, reg) == value ? on : off).entries().emplace(b, a);
    }
    if (on.empty()) return off;
    SparseState out = step(on);
    for (const auto &[b, a] : off.entries()) out.add(b, a);
    out.prune();
    return out;
}

}  // namespace detail

/// Runs a prover strategy for L repetitions against one shared compressed
/// oracle. Images are sampled classically (they are measured first). The
/// trapdoor fills in the collapsed branches and the claws used for scoring.
inline ProverRun run_prover(const ProverStrategy &strategy, const SecretKey &sk, unsigned L, RunMode mode, Rng &rng, bool verifier_regs = false,
                            std::size_t extra_budget = 0) {
    if (L == 0 || L > unexp::kMaxRepetitionsCompressed) throw ParameterError("repetition count outside [1, 4]");
    if (mode == RunMode::Coherent && L > 1) throw ParameterError("coherent runs support L = 1 only");
    if (strategy.kind == StrategyKind::PartialQuery && strategy.l > L) throw ParameterError("partial query count exceeds L");
    if (strategy.kind == StrategyKind::Custom && !strategy.custom) throw ParameterError("custom strategy without a step");
    unsigned n = sk.pk.preimage_bits();
    ProverRun run;
    run.n = n;
    run.L = L;
    run.oracle = oracle::CompressedOracle(L + extra_budget);
    run.state = SparseState::basis_state(prover_layout(n, L, verifier_regs));
    if (strategy.kind == StrategyKind::Mixture) run.state = qsim::hadamard_all(run.state, {"W"});
    for (unsigned i = 0; i < L; i++) {
        auto cb = sample_collapsed(sk.pk, &sk, rng);
        run.samples.push_back(cb);
        run.ctx.claws.push_back(claw_of(sk, cb.y));
        run.ctx.z_regs.push_back(z_reg(i));
        run.ctx.d_regs.push_back(d_reg(i));
        auto honest = [&](const SparseState &s) { return detail::honest_step(s, i, cb, run.oracle); };
        switch (strategy.kind) {
            case StrategyKind::Honest:
                run.state = honest(run.state);
                break;
            case StrategyKind::PartialQuery:
                if (i < strategy.l) run.state = honest(run.state);
                break;
            case StrategyKind::Mixture:
                run.state = detail::controlled(run.state, "W", 1, honest);
                break;
            case StrategyKind::Custom:
                run.state = strategy.custom(run.state, i, cb, run.oracle);
                break;
            case StrategyKind::NoQueryGuess:
                break;
        }
        if (mode == RunMode::Coherent) {
            run.state = qsim::hadamard_all(run.state, {z_reg(i), d_reg(i)});
        } else {
            run.state = qsim::measure_hadamard(run.state, {z_reg(i), d_reg(i)}, rng).post_state;
        }
    }
    return run;
}

/// Coefficients of one (registers, database-minus-claw) block against the
/// three-way split: one preimage recorded (α_0, α_1), both (β), neither (γ).
struct BlockCoefficients {
    Amplitude alpha0 = 0, alpha1 = 0, beta = 0, gamma = 0;
    unsigned t = 0;  // z ⊕ d·(x0 ⊕ x1) for the block's registers
};

struct StructureDecomposition {
    std::map<Basis, BlockCoefficients> blocks;
    /// Raw weight of basis entries per class: [x0 only, x1 only, both, neither].
    std::array<double, 4> class_weight{};
    double alpha_weight = 0;
    double beta_weight = 0;
    double gamma_weight = 0;

    double coefficient_total() const {
        return alpha_weight + beta_weight + gamma_weight;
    }
};

inline StructureDecomposition decompose_state(const SparseState &s, const EquationContext &ctx, std::size_t i) {
    const auto &claw = ctx.claws.at(i);
    if (!claw) throw DomainError("repetition has no claw to decompose against");
    const auto &layout = s.layout();
    StructureDecomposition out;
    std::array<KahanSum, 4> cw;
    for (const auto &[b, a] : s.entries()) {
        const auto *e0 = b.db.find(claw->x0);
        const auto *e1 = b.db.find(claw->x1);
        Database rest = b.db;
        if (e0) rest = rest.without(claw->x0);
        if (e1) rest = rest.without(claw->x1);
        auto &blk = out.blocks[Basis{b.regs, rest}];
        blk.t = ctx.z_raw(layout, b, i) ^ parity(ctx.d(layout, b, i) & (claw->x0 ^ claw->x1));
        double w = std::norm(a);
        if (e0 && e1) {
            blk.beta += a * (((e0->v ^ e1->v) ? -0.5 : 0.5));
            cw[2] += w;
        } else if (e0) {
            blk.alpha0 += a * (e0->v ? -qsim::kInvSqrt2 : qsim::kInvSqrt2);
            cw[0] += w;
        } else if (e1) {
            blk.alpha1 += a * (e1->v ? -qsim::kInvSqrt2 : qsim::kInvSqrt2);
            cw[1] += w;
        } else {
            blk.gamma += a;
            cw[3] += w;
        }
    }
    KahanSum aw, bw, gw;
    for (const auto &[key, blk] : out.blocks) {
        aw += std::norm(blk.alpha0) + std::norm(blk.alpha1);
        bw += std::norm(blk.beta);
        gw += std::norm(blk.gamma);
    }
    for (int c = 0; c < 4; c++) out.class_weight[c] = cw[c].value();
    out.alpha_weight = aw.value();
    out.beta_weight = bw.value();
    out.gamma_weight = gw.value();
    return out;
}

struct XorReport {
    double residual = 0;  // ‖ψ − ψ′‖²
    double validity = 0;  // probability that equation i holds
    double epsilon = 0;
    bool bound_holds = false;  // residual ≤ 2ε + 1e-10
};

/// Builds ψ′ by keeping α_0 and β and setting α_1 := (−1)^t α_0, γ := (−1)^t β,
/// then returns ‖ψ − ψ′‖² against the bound 2ε with ε = 1 − validity.
inline XorReport check_xor_structure(const SparseState &s, const EquationContext &ctx, std::size_t i, std::optional<double> epsilon = std::nullopt) {
    auto dec = decompose_state(s, ctx, i);
    KahanSum r;
    for (const auto &[key, blk] : dec.blocks) {
        double sign = blk.t ? -1.0 : 1.0;
        r += std::norm(blk.alpha1 - sign * blk.alpha0);
        r += std::norm(blk.gamma - sign * blk.beta);
    }
    XorReport rep;
    rep.residual = r.value();
    rep.validity = unexp::equation_validity(s, ctx, i);
    rep.epsilon = epsilon.value_or(1.0 - rep.validity);
    rep.bound_holds = rep.residual <= 2 * rep.epsilon + 1e-10;
    return rep;
}

/// Control state: flips the sign of every entry whose database records x1 of
/// repetition i while bit 0 of d_i is 1. Returns the state and the weight of
/// the flipped blocks (entries that record either preimage with that d bit).
inline std::pair<SparseState, double> phase_broken(const SparseState &s, const EquationContext &ctx, std::size_t i) {
    const auto &claw = ctx.claws.at(i);
    if (!claw) throw DomainError("repetition has no claw");
    const auto &layout = s.layout();
    KahanSum broken;
    auto out = qsim::apply_phase(s, [&](const Basis &b) -> Amplitude {
        bool selected = (ctx.d(layout, b, i) & 1) != 0;
        return selected && b.db.contains(claw->x1) ? -1.0 : 1.0;
    });
    for (const auto &[b, a] : s.entries()) {
        if ((ctx.d(layout, b, i) & 1) && (b.db.contains(claw->x0) || b.db.contains(claw->x1))) broken += std::norm(a);
    }
    return {out, broken.value()};
}

struct BoundReport {
    bool premise_holds = false;
    double no_claw_norm = 0;
    double at_most_norm = 0;
    double value = 0;  // ‖Π_valid DecompAll ψ‖²
    double bound = 0;  // 2^{-L+l}
    bool holds = false;
    std::string note;
};

/// On states in the no-claw and at-most-l subspaces the validity of all L
/// equations is at most 2^{-L+l}.
inline BoundReport check_no_preimage_bound(const SparseState &s, const EquationContext &ctx, unsigned l) {
    BoundReport rep;
    double total = s.norm_sq();
    rep.no_claw_norm = unexp::apply_projector(ProjectorSpec::no_claw(), ctx, s).norm_sq / total;
    rep.at_most_norm = unexp::apply_projector(ProjectorSpec::at_most(l), ctx, s).norm_sq / total;
    rep.bound = std::ldexp(1.0, static_cast<int>(l) - static_cast<int>(ctx.size()));
    for (const auto &c : ctx.claws) {
        if (!c) {
            rep.note = "an image has no claw";
            return rep;
        }
    }
    // Equations sharing oracle points are not independent coins.
    for (std::size_t i = 0; i < ctx.size(); i++) {
        for (std::size_t j = i + 1; j < ctx.size(); j++) {
            const auto &a = *ctx.claws[i], &b = *ctx.claws[j];
            if (a.x0 == b.x0 || a.x0 == b.x1 || a.x1 == b.x0 || a.x1 == b.x1) {
                rep.note = "repetitions " + std::to_string(i) + " and " + std::to_string(j) + " share a preimage";
                return rep;
            }
        }
    }
    if (std::abs(rep.no_claw_norm - 1) > 1e-10 || std::abs(rep.at_most_norm - 1) > 1e-10) {
        rep.note = "state outside the no-claw / at-most-l subspace";
        return rep;
    }
    rep.premise_holds = true;
    rep.value = unexp::validity(s, ctx) / total;
    rep.holds = rep.value <= rep.bound + 1e-10;
    return rep;
}

/// Canonical trapdoored verifier with concrete oracle access: accepts the
/// claim m iff every equation z'_i ⊕ m = d_i·(x0 ⊕ x1) ⊕ H(x0) ⊕ H(x1) holds.
inline bool verify_consistency(const SecretKey &sk, const unexp::OracleFn &h, const unexp::ParallelCiphertext &c, unsigned m) {
    if (!c.consistent() || c.size() == 0) return false;
    for (std::size_t i = 0; i < c.size(); i++) {
        auto claw = claw_of(sk, c.y[i]);
        if (!claw) return false;
        unsigned lhs = c.z_prime[i] ^ (m & 1) ^ parity(c.d[i] & (claw->x0 ^ claw->x1));
        if (lhs != (h(claw->x0) ^ h(claw->x1))) return false;
    }
    return true;
}

/// The same verifier run coherently against the compressed oracle: for every
/// repetition and both preimages A_i ^= H(x_b); then Q ^= [all A_i match].
/// z_i and d_i must be classical (measured) in the run. Returns the state
/// with Q set but not measured; the caller spends 2L queries of the budget.
inline SparseState verify_compressed(const ProverRun &run, oracle::CompressedOracle &o, const unexp::ParallelCiphertext &c, unsigned m) {
    SparseState s = run.state;
    std::vector<unsigned> target(run.L);
    for (unsigned i = 0; i < run.L; i++) {
        const auto &claw = run.ctx.claws.at(i);
        if (!claw) return s;  // reject: Q stays 0
        target[i] = c.z_prime[i] ^ (m & 1) ^ parity(c.d[i] & (claw->x0 ^ claw->x1));
        for (Word x : {claw->x0, claw->x1}) {
            s = qsim::xor_value(s, "VX", x);
            s = o.standard_query(s, "VX", a_reg(i));
            s = qsim::xor_value(s, "VX", x);
        }
    }
    const auto &layout = s.layout();
    return qsim::apply_permutation(s, [&](const Basis &b) {
        bool ok = true;
        for (unsigned i = 0; i < run.L; i++) ok = ok && layout.get(b.regs, a_reg(i)) == target[i];
        return ok ? Basis{layout.set(b.regs, "Q", layout.get(b.regs, "Q") ^ 1), b.db} : b;
    });
}

/// Reads (z, d) from a measured run as a ciphertext with m = 0.
inline unexp::ParallelCiphertext measured_ciphertext(const ProverRun &run) {
    unexp::ParallelCiphertext c;
    const auto &layout = run.state.layout();
    const Word regs = run.state.entries().begin()->first.regs;
    for (unsigned i = 0; i < run.L; i++) {
        c.z_prime.push_back(static_cast<unsigned>(layout.get(regs, z_reg(i))));
        c.d.push_back(layout.get(regs, d_reg(i)));
        c.y.push_back(run.samples[i].y);
    }
    return c;
}

/// Measures the pattern of repetitions I = {0..last} and collapses the state.
inline std::vector<Pattern> measure_pattern(SparseState &s, const EquationContext &ctx, unsigned last, Rng &rng) {
    std::map<std::vector<Pattern>, KahanSum> weights;
    auto pattern_of = [&](const Database &db) {
        std::vector<Pattern> p;
        for (unsigned j = 0; j <= last; j++) p.push_back(ctx.claws.at(j) ? unexp::classify(db, *ctx.claws[j]) : Pattern::Neither);
        return p;
    };
    for (const auto &[b, a] : s.entries()) weights[pattern_of(b.db)] += std::norm(a);
    KahanSum total;
    for (auto &[p, w] : weights) total += w.value();
    double u = rng.uniform01() * total.value();
    std::vector<Pattern> chosen = weights.rbegin()->first;
    KahanSum acc;
    for (auto &[p, w] : weights) {
        acc += w.value();
        if (u < acc.value() && w.value() > 0) {
            chosen = p;
            break;
        }
    }
    std::erase_if(s.entries(), [&](const auto &kv) { return pattern_of(kv.first.db) != chosen; });
    s.normalize();
    return chosen;
}

/// Samples one database label by its marginal weight and collapses onto it.
inline Database measure_database(SparseState &s, Rng &rng) {
    std::map<Database, KahanSum> weights;
    for (const auto &[b, a] : s.entries()) weights[b.db] += std::norm(a);
    KahanSum total;
    for (auto &[d, w] : weights) total += w.value();
    double u = rng.uniform01() * total.value();
    Database chosen = weights.rbegin()->first;
    KahanSum acc;
    for (auto &[d, w] : weights) {
        acc += w.value();
        if (u < acc.value() && w.value() > 0) {
            chosen = d;
            break;
        }
    }
    std::erase_if(s.entries(), [&](const auto &kv) { return !(kv.first.db == chosen); });
    s.normalize();
    return chosen;
}

struct ExtractionTrial {
    bool preimage_found = false;  // stage (ii)
    unsigned found_bit = 0;
    bool accepted = false;  // stage (iii)
    bool claw_found = false;
    bool claw_verified = false;  // chk on both halves, no trapdoor
    bool claw_matches_trapdoor = false;
    Word x0 = 0, x1 = 0;
    Image y;
};

struct ExtractionReport {
    std::string strategy;
    unsigned n = 0, L = 0;
    std::size_t trials = 0;
    std::size_t preimage_found = 0;
    std::array<std::size_t, 2> found_bit{};
    std::size_t accepts = 0;
    std::size_t claw_found = 0;
    std::size_t claws_verified = 0;
    std::size_t claws_match_trapdoor = 0;

    double claw_rate() const {
        return trials ? static_cast<double>(claw_found) / static_cast<double>(trials) : 0.0;
    }
    double accept_rate() const {
        return trials ? static_cast<double>(accepts) / static_cast<double>(trials) : 0.0;
    }
    bool consistent() const {
        return claw_found <= accepts && accepts <= trials && claw_found <= preimage_found && claws_verified == claw_found;
    }
};

/// One run of the extractor: (i) Explain in measured mode; (ii) sample
/// i ≤ L/2 with a target bit s from the prefix family, measure the pattern on
/// [0, i] and keep any preimage recorded at repetition i; (iii) run the
/// canonical verifier against the same compressed oracle, measure Q and, on
/// acceptance, the database, and look for the opposite preimage with chk.
/// The trapdoor is only used to write down the prover's states and to score.
inline ExtractionTrial extract_once(const ProverStrategy &explain, const SecretKey &sk, unsigned L, Rng &rng) {
    ExtractionTrial t;
    auto run = run_prover(explain, sk, L, RunMode::Measured, rng, true, 2 * L);
    auto c = measured_ciphertext(run);
    unsigned i = static_cast<unsigned>(rng.below(std::max(1u, L / 2)));
    rng.bit();  // target bit s; the relaxed rule keeps whichever preimage appears
    auto pattern = measure_pattern(run.state, run.ctx, i, rng);
    t.y = run.samples[i].y;
    if (!run.ctx.claws[i]) return t;
    const auto &claw = *run.ctx.claws[i];
    if (pattern[i] == Pattern::Zero || pattern[i] == Pattern::One) {
        t.preimage_found = true;
        t.found_bit = pattern[i] == Pattern::One ? 1 : 0;
    }
    auto verified = verify_compressed(run, run.oracle, c, 0);
    auto q = qsim::measure(verified, "Q", rng);
    t.accepted = q.value == 1;
    if (!t.accepted || !t.preimage_found) return t;
    SparseState post = std::move(q.post_state);
    auto db = measure_database(post, rng);
    Word known = t.found_bit ? claw.x1 : claw.x0;
    unsigned other = t.found_bit ^ 1;
    for (const auto &e : db.entries()) {
        if (e.x == known) continue;
        if (chk(sk.pk, other, e.x, t.y)) {
            t.claw_found = true;
            t.x0 = other == 0 ? e.x : known;
            t.x1 = other == 1 ? e.x : known;
            break;
        }
    }
    if (t.claw_found) {
        t.claw_verified = chk(sk.pk, 0, t.x0, t.y) && chk(sk.pk, 1, t.x1, t.y);
        t.claw_matches_trapdoor = t.x0 == claw.x0 && t.x1 == claw.x1;
    }
    return t;
}

inline ExtractionReport extract_claw(const ProverStrategy &explain, const SecretKey &sk, unsigned L, std::size_t trials, std::uint64_t seed,
                                     const std::function<void(std::size_t, const std::function<void(std::size_t)> &)> &for_each = {}) {
    std::vector<ExtractionTrial> out(trials);
    auto body = [&](std::size_t idx) {
        Rng rng = Rng::substream(seed, idx);
        out[idx] = extract_once(explain, sk, L, rng);
    };
    if (for_each) {
        for_each(trials, body);
    } else {
        for (std::size_t idx = 0; idx < trials; idx++) body(idx);
    }
    ExtractionReport rep;
    rep.strategy = explain.name();
    rep.n = sk.pk.preimage_bits();
    rep.L = L;
    rep.trials = trials;
    for (const auto &t : out) {
        if (t.preimage_found) {
            rep.preimage_found++;
            rep.found_bit[t.found_bit]++;
        }
        rep.accepts += t.accepted;
        rep.claw_found += t.claw_found;
        rep.claws_verified += t.claw_verified;
        rep.claws_match_trapdoor += t.claw_matches_trapdoor;
    }
    return rep;
}

struct CleanStructureReport {
    std::string strategy;
    std::size_t samples = 0;
    double mean_validity = 0;
    double delta = 0;
    double beta_weight = 0;    // clause (i)
    double single_weight = 0;  // clause (ii)
    double mismatch = 0;       // clause (iii)
    bool clause_i = false;
    bool clause_ii = false;
    bool clause_iii = false;

    bool passed() const {
        return clause_i && clause_ii && clause_iii;
    }
};

/// Single-equation ensemble averages over keys (and one image per key).
/// δ is the exact mean validity minus 1/2.
inline CleanStructureReport check_clean_structure(const ProverStrategy &strategy, const std::vector<SecretKey> &keys, std::uint64_t seed, double slack = 1e-9) {
    CleanStructureReport rep;
    rep.strategy = strategy.name();
    KahanSum val, beta, single, mism;
    for (std::size_t k = 0; k < keys.size(); k++) {
        Rng rng = Rng::substream(seed, k);
        auto run = run_prover(strategy, keys[k], 1, RunMode::Coherent, rng);
        if (!run.ctx.claws[0]) continue;
        auto dec = decompose_state(run.state, run.ctx, 0);
        val += unexp::equation_validity(run.state, run.ctx, 0);
        beta += dec.beta_weight;
        single += dec.alpha_weight;
        KahanSum m;
        for (const auto &[key, blk] : dec.blocks) m += std::norm(blk.alpha0 - (blk.t ? -1.0 : 1.0) * blk.alpha1);
        mism += m.value();
        rep.samples++;
    }
    if (rep.samples == 0) throw DomainError("no key in the ensemble has claws");
    double cnt = static_cast<double>(rep.samples);
    rep.mean_validity = val.value() / cnt;
    rep.delta = rep.mean_validity - 0.5;
    rep.beta_weight = beta.value() / cnt;
    rep.single_weight = single.value() / cnt;
    rep.mismatch = mism.value() / cnt;
    rep.clause_i = rep.beta_weight == 0.0;
    rep.clause_ii = rep.single_weight >= 2 * rep.delta - slack;
    rep.clause_iii = rep.mismatch <= rep.single_weight - 2 * rep.delta + slack;
    return rep;
}

}  // namespace qdeny::rigidity
