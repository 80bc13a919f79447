#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "qdeny/common.hpp"
#include "qdeny/qsim.hpp"
#include "qdeny/state.hpp"

namespace qdeny::oracle {

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

namespace detail {

/// StdDecomp at the input chosen per basis entry by `pick`; one-bit outputs.
inline SparseState std_decomp_with(const SparseState &s, const std::function<Word(const Basis &)> &pick, std::size_t capacity) {
    SparseState out(s.layout());
    const double h = qsim::kInvSqrt2;
    for (const auto &[b, a] : s.entries()) {
        Word x = pick(b);
        if (const auto *e = b.db.find(x)) {
            // |x,v⟩ = (|+⟩ + (−1)^v |−⟩)/√2; the |+⟩ part is swapped with ⊥.
            Database rest = b.db.without(x);
            double sign = e->v ? -1.0 : 1.0;
            out.add(Basis{b.regs, rest}, a * h);
            out.add(Basis{b.regs, rest.with(x, 0)}, a * (sign * 0.5));
            out.add(Basis{b.regs, rest.with(x, 1)}, a * (-sign * 0.5));
        } else if (b.db.size() < capacity) {
            out.add(Basis{b.regs, b.db.with(x, 0)}, a * h);
            out.add(Basis{b.regs, b.db.with(x, 1)}, a * h);
        } else {
            out.add(b, a);  // database full and x absent: identity
        }
    }
    out.prune();
    return out;
}

}  // namespace detail

/// StdDecomp_x for a fixed input x.
inline SparseState std_decomp(const SparseState &s, Word x, std::size_t capacity = kUnbounded) {
    return detail::std_decomp_with(s, [x](const Basis &) { return x; }, capacity);
}

/// One query to the compressed phase oracle, controlled on the x register:
/// StdDecomp ∘ (−1)^{e·D(x)} ∘ StdDecomp.
inline SparseState cpho_query(const SparseState &s, const std::string &x_reg, const std::string &e_reg, std::size_t capacity = kUnbounded) {
    const auto &layout = s.layout();
    auto pick = [&](const Basis &b) { return layout.get(b.regs, x_reg); };
    SparseState t = detail::std_decomp_with(s, pick, capacity);
    t = qsim::apply_phase(t, [&](const Basis &b) -> Amplitude {
        if (layout.get(b.regs, e_reg) == 0) return 1.0;
        const auto *e = b.db.find(layout.get(b.regs, x_reg));
        return (e != nullptr && e->v) ? -1.0 : 1.0;
    });
    return detail::std_decomp_with(t, pick, capacity);
}

/// Standard-oracle form (target ^= H(x)), as the Hadamard conjugate of the phase form.
inline SparseState cstd_query(const SparseState &s, const std::string &x_reg, const std::string &y_reg, std::size_t capacity = kUnbounded) {
    auto t = qsim::hadamard_all(s, {y_reg});
    t = cpho_query(t, x_reg, y_reg, capacity);
    return qsim::hadamard_all(t, {y_reg});
}

/// Compressed oracle with a fixed query budget t; Increase is folded into
/// the budget because |D| < t before every permitted query.
class CompressedOracle {
   public:
    explicit CompressedOracle(std::size_t budget) : budget_(budget) {
    }

    SparseState phase_query(const SparseState &s, const std::string &x_reg, const std::string &e_reg) {
        consume();
        return cpho_query(s, x_reg, e_reg, budget_);
    }

    SparseState standard_query(const SparseState &s, const std::string &x_reg, const std::string &y_reg) {
        consume();
        return cstd_query(s, x_reg, y_reg, budget_);
    }

    std::size_t budget() const {
        return budget_;
    }
    std::size_t issued() const {
        return issued_;
    }

   private:
    void consume() {
        if (issued_ >= budget_) throw DomainError("compressed oracle query budget exhausted");
        issued_++;
    }

    std::size_t budget_;
    std::size_t issued_ = 0;
};

/// Purified full phase oracle: the truth table H lives in register tt_reg
/// (bit x holds H(x)) and the query applies (−1)^{e·H(x)}.
inline SparseState full_phase_oracle_query(const SparseState &s, const std::string &tt_reg, const std::string &x_reg, const std::string &e_reg) {
    const auto &layout = s.layout();
    unsigned tt_width = layout.at(tt_reg).width;
    if (tt_width > 16) throw ParameterError("truth-table register limited to n ≤ 4");
    return qsim::apply_phase(s, [&](const Basis &b) -> Amplitude {
        if (layout.get(b.regs, e_reg) == 0) return 1.0;
        Word x = layout.get(b.regs, x_reg);
        if (x >= tt_width) throw DomainError("query input outside truth table");
        return bit_of(layout.get(b.regs, tt_reg), static_cast<unsigned>(x)) ? -1.0 : 1.0;
    });
}

inline SparseState full_standard_oracle_query(const SparseState &s, const std::string &tt_reg, const std::string &x_reg, const std::string &y_reg) {
    auto t = qsim::hadamard_all(s, {y_reg});
    t = full_phase_oracle_query(t, tt_reg, x_reg, y_reg);
    return qsim::hadamard_all(t, {y_reg});
}

/// Every input specified by some database in the state.
inline std::set<Word> database_support(const SparseState &s) {
    std::set<Word> out;
    for (const auto &[b, a] : s.entries()) {
        for (const auto &e : b.db.entries()) out.insert(e.x);
    }
    return out;
}

/// DecompAll restricted to `relevant` plus every input already present.
/// Inputs never referenced only contribute a product |+⟩ factor and are dropped.
inline SparseState decomp_all(const SparseState &s, const std::vector<Word> &relevant) {
    std::set<Word> points = database_support(s);
    points.insert(relevant.begin(), relevant.end());
    SparseState cur = s;
    for (Word x : points) cur = std_decomp(cur, x, kUnbounded);
    return cur;
}

/// Structural assertion: every database sorted with one-bit values.
inline bool databases_canonical(const SparseState &s) {
    for (const auto &[b, a] : s.entries()) {
        if (!b.db.canonical()) return false;
    }
    return true;
}

inline std::size_t max_database_size(const SparseState &s) {
    std::size_t m = 0;
    for (const auto &[b, a] : s.entries()) m = std::max(m, b.db.size());
    return m;
}

/// Decompresses at `points` and samples the oracle values there, collapsing
/// the state accordingly. Used to fix H where a compressed run must be decrypted.
inline std::map<Word, unsigned> measure_oracle_values(SparseState &s, const std::vector<Word> &points, Rng &rng) {
    std::vector<Word> uniq(points.begin(), points.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    SparseState cur = s;
    for (Word x : uniq) cur = std_decomp(cur, x, kUnbounded);
    std::map<Word, unsigned> values;
    for (Word x : uniq) {
        KahanSum w0, w1;
        for (const auto &[b, a] : cur.entries()) {
            const auto *e = b.db.find(x);
            (e->v ? w1 : w0) += std::norm(a);
        }
        double total = w0.value() + w1.value();
        unsigned v = rng.uniform01() * total < w0.value() ? 0 : 1;
        if ((v ? w1 : w0).value() <= 0) v ^= 1;
        values[x] = v;
        std::erase_if(cur.entries(), [&](const auto &kv) { return kv.first.db.find(x)->v != v; });
        cur.normalize();
    }
    s = std::move(cur);
    return values;
}

}  // namespace qdeny::oracle
