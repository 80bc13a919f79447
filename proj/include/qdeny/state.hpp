#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qdeny/common.hpp"

namespace qdeny {

using Amplitude = std::complex<double>;

inline constexpr double kPruneEps = 1e-12;

/// Compressed-oracle database: the specified (input, value) pairs, strictly
/// increasing by input. Unused capacity (⊥ slots) is implicit and trails.
class Database {
   public:
    struct Entry {
        Word x = 0;
        std::uint8_t v = 0;
        auto operator<=>(const Entry &) const = default;
    };

    Database() = default;
    explicit Database(std::vector<Entry> entries) : entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end());
        for (std::size_t i = 1; i < entries_.size(); i++) {
            if (entries_[i].x == entries_[i - 1].x) {
                throw DomainError("database input repeated");
            }
        }
    }

    std::size_t size() const {
        return entries_.size();
    }
    bool empty() const {
        return entries_.empty();
    }
    const std::vector<Entry> &entries() const {
        return entries_;
    }

    const Entry *find(Word x) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), x, [](const Entry &e, Word k) { return e.x < k; });
        if (it != entries_.end() && it->x == x) {
            return &*it;
        }
        return nullptr;
    }
    bool contains(Word x) const {
        return find(x) != nullptr;
    }

    Database with(Word x, unsigned v) const {
        Database out = *this;
        auto it = std::lower_bound(out.entries_.begin(), out.entries_.end(), x, [](const Entry &e, Word k) { return e.x < k; });
        if (it != out.entries_.end() && it->x == x) {
            throw DomainError("database already specifies input");
        }
        out.entries_.insert(it, Entry{x, static_cast<std::uint8_t>(v & 1)});
        return out;
    }

    Database without(Word x) const {
        Database out = *this;
        auto it = std::lower_bound(out.entries_.begin(), out.entries_.end(), x, [](const Entry &e, Word k) { return e.x < k; });
        if (it == out.entries_.end() || it->x != x) {
            throw DomainError("database does not specify input");
        }
        out.entries_.erase(it);
        return out;
    }

    bool canonical() const {
        for (std::size_t i = 0; i < entries_.size(); i++) {
            if (entries_[i].v > 1) return false;
            if (i > 0 && !(entries_[i - 1].x < entries_[i].x)) return false;
        }
        return true;
    }

    auto operator<=>(const Database &) const = default;
    bool operator==(const Database &) const = default;

   private:
    std::vector<Entry> entries_;
};

struct RegisterInfo {
    std::string name;
    unsigned offset = 0;
    unsigned width = 0;
};

/// Named registers packed into a 128-bit basis word, first register at bit 0.
class RegisterLayout {
   public:
    static constexpr unsigned kMaxWidth = 128;

    RegisterLayout() = default;
    RegisterLayout(std::initializer_list<std::pair<std::string, unsigned>> regs) {
        for (const auto &[name, width] : regs) {
            add(name, width);
        }
    }

    RegisterLayout &add(const std::string &name, unsigned width) {
        if (width == 0) {
            throw ParameterError("register '" + name + "' has zero width");
        }
        if (has(name)) {
            throw ParameterError("duplicate register '" + name + "'");
        }
        if (total_ + width > kMaxWidth) {
            throw ParameterError("register layout exceeds 128 bits");
        }
        regs_.push_back({name, total_, width});
        total_ += width;
        return *this;
    }

    bool has(const std::string &name) const {
        return std::any_of(regs_.begin(), regs_.end(), [&](const RegisterInfo &r) { return r.name == name; });
    }

    const RegisterInfo &at(const std::string &name) const {
        for (const auto &r : regs_) {
            if (r.name == name) return r;
        }
        throw DomainError("register '" + name + "' absent from layout");
    }

    unsigned total_width() const {
        return total_;
    }
    const std::vector<RegisterInfo> &registers() const {
        return regs_;
    }

    Word get(Word label, const std::string &name) const {
        const auto &r = at(name);
        return (label >> r.offset) & word_mask(r.width);
    }

    Word set(Word label, const std::string &name, Word value) const {
        const auto &r = at(name);
        Word m = word_mask(r.width) << r.offset;
        return (label & ~m) | ((value << r.offset) & m);
    }

    bool operator==(const RegisterLayout &o) const {
        if (regs_.size() != o.regs_.size()) return false;
        for (std::size_t i = 0; i < regs_.size(); i++) {
            if (regs_[i].name != o.regs_[i].name || regs_[i].width != o.regs_[i].width) return false;
        }
        return true;
    }

   private:
    std::vector<RegisterInfo> regs_;
    unsigned total_ = 0;
};

struct Basis {
    Word regs = 0;
    Database db;

    auto operator<=>(const Basis &) const = default;
    bool operator==(const Basis &) const = default;
};

/// Sparse state vector. Entries are kept in label order so every reduction
/// iterates deterministically.
class SparseState {
   public:
    using Map = std::map<Basis, Amplitude>;

    SparseState() = default;
    explicit SparseState(RegisterLayout layout) : layout_(std::move(layout)) {
    }

    static SparseState basis_state(RegisterLayout layout, Word regs = 0, Database db = {}) {
        SparseState s(std::move(layout));
        s.entries_[Basis{regs, std::move(db)}] = 1.0;
        return s;
    }

    const RegisterLayout &layout() const {
        return layout_;
    }
    const Map &entries() const {
        return entries_;
    }
    Map &entries() {
        return entries_;
    }
    std::size_t size() const {
        return entries_.size();
    }
    bool empty() const {
        return entries_.empty();
    }

    void add(const Basis &b, Amplitude a) {
        auto [it, inserted] = entries_.try_emplace(b, a);
        if (!inserted) {
            it->second += a;
        }
    }

    Amplitude amplitude(const Basis &b) const {
        auto it = entries_.find(b);
        return it == entries_.end() ? Amplitude{0.0, 0.0} : it->second;
    }

    double norm_sq() const {
        KahanSum s;
        for (const auto &[b, a] : entries_) {
            s += std::norm(a);
        }
        return s.value();
    }

    void prune(double eps = kPruneEps) {
        std::erase_if(entries_, [&](const auto &kv) { return std::abs(kv.second) < eps; });
    }

    void scale(Amplitude f) {
        for (auto &[b, a] : entries_) {
            a *= f;
        }
    }

    void normalize() {
        double n = norm_sq();
        if (n <= 0.0) {
            throw DomainError("cannot normalize the zero vector");
        }
        scale(1.0 / std::sqrt(n));
    }

    bool has_database() const {
        return std::any_of(entries_.begin(), entries_.end(), [](const auto &kv) { return !kv.first.db.empty(); });
    }

   private:
    RegisterLayout layout_;
    Map entries_;
};

inline Amplitude inner_product(const SparseState &a, const SparseState &b) {
    if (!(a.layout() == b.layout())) {
        throw DomainError("inner product of states with different layouts");
    }
    KahanSum re, im;
    for (const auto &[basis, amp] : a.entries()) {
        auto other = b.amplitude(basis);
        auto p = std::conj(amp) * other;
        re += p.real();
        im += p.imag();
    }
    return {re.value(), im.value()};
}

/// Squared distance ‖a − b‖².
inline double distance_sq(const SparseState &a, const SparseState &b) {
    KahanSum s;
    for (const auto &[basis, amp] : a.entries()) {
        s += std::norm(amp - b.amplitude(basis));
    }
    for (const auto &[basis, amp] : b.entries()) {
        if (a.entries().find(basis) == a.entries().end()) {
            s += std::norm(amp);
        }
    }
    return s.value();
}

struct DumpRow {
    std::string label_hex;
    std::string database;
    double re = 0;
    double im = 0;
};

/// (label-hex, re, im) rows sorted by label; databases rendered as "x:v,..." in hex.
inline std::vector<DumpRow> dump(const SparseState &s) {
    std::vector<DumpRow> rows;
    unsigned w = std::max(1u, s.layout().total_width());
    for (const auto &[b, a] : s.entries()) {
        std::string db;
        for (const auto &e : b.db.entries()) {
            if (!db.empty()) db += ",";
            db += to_hex(e.x, 128) + ":" + std::to_string(e.v);
        }
        rows.push_back({to_hex(b.regs, w), db, a.real(), a.imag()});
    }
    return rows;
}

}  // namespace qdeny
