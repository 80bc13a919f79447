#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdeny/common.hpp"
#include "qdeny/lattice_ntcf.hpp"
#include "qdeny/qsim.hpp"
#include "qdeny/rng.hpp"
#include "qdeny/state.hpp"
#include "qdeny/tcf.hpp"

namespace qdeny {

/// Image label: one word for toy families, m·N coefficients for lattice keys.
using Image = std::vector<std::int64_t>;

/// Public key of any supported family.
struct PublicKey {
    tcf::Family family = tcf::Family::ExactClawFree;
    tcf::TcfKey toy;
    lattice::LatticeKey lat;

    bool is_lattice() const {
        return family == tcf::Family::LatticeNtcf;
    }
    unsigned preimage_bits() const {
        return is_lattice() ? lat.params.preimage_bits() : toy.n;
    }
};

/// Key plus trapdoor. The trapdoor serves decryption and scoring; the
/// simulator also uses it to write down exact post-measurement states.
struct SecretKey {
    PublicKey pk;
    tcf::Trapdoor toy;
    lattice::LatticeTrapdoor lat;
};

inline SecretKey keygen(tcf::Family family, unsigned n, std::uint64_t seed, const lattice::LatticeParams &params = lattice::LatticeParams::desk()) {
    SecretKey sk;
    sk.pk.family = family;
    if (family == tcf::Family::LatticeNtcf) {
        Rng rng = Rng::substream(seed, 0x1A77);
        auto [k, td] = lattice::gen_trap(params, rng);
        sk.pk.lat = std::move(k);
        sk.lat = std::move(td);
    } else {
        auto [k, td] = tcf::gen(family, n, seed);
        sk.pk.toy = k;
        sk.toy = td;
    }
    return sk;
}

inline unsigned chk(const PublicKey &pk, unsigned b, Word x, const Image &y) {
    if (pk.is_lattice()) return lattice::ntcf_chk(pk.lat, b, x, y);
    if (y.size() != 1 || y[0] < 0) return 0;
    return tcf::chk(pk.toy, b, x, static_cast<Word>(y[0]));
}

inline std::optional<Word> invert(const SecretKey &sk, unsigned b, const Image &y) {
    if (sk.pk.is_lattice()) return lattice::ntcf_invert(sk.pk.lat, sk.lat, b, y);
    if (y.size() != 1 || y[0] < 0) return std::nullopt;
    return tcf::invert(sk.toy, b, static_cast<Word>(y[0]));
}

struct Claw {
    Word x0 = 0;
    Word x1 = 0;
};

/// Both preimages of y, each confirmed by the public check; ⊥ otherwise.
inline std::optional<Claw> claw_of(const SecretKey &sk, const Image &y) {
    if (sk.pk.family == tcf::Family::InjectiveTwin) return std::nullopt;
    auto x0 = invert(sk, 0, y);
    auto x1 = invert(sk, 1, y);
    if (!x0 || !x1) return std::nullopt;
    if (!chk(sk.pk, 0, *x0, y) || !chk(sk.pk, 1, *x1, y)) return std::nullopt;
    return Claw{*x0, *x1};
}

inline std::string image_hex(const PublicKey &pk, const Image &y) {
    if (!pk.is_lattice()) return to_hex(static_cast<Word>(y.at(0)), pk.toy.image_bits());
    std::string out;
    for (auto c : y) out += to_hex(static_cast<Word>(c), 32);
    return out;
}

inline Image image_from_hex(const PublicKey &pk, const std::string &hex) {
    if (!pk.is_lattice()) return Image{static_cast<std::int64_t>(from_hex(hex, pk.toy.image_bits()))};
    if (hex.size() != 8 * pk.lat.params.image_coords()) throw ParameterError("lattice image hex has wrong length");
    Image y;
    for (std::size_t i = 0; i < hex.size(); i += 8) y.push_back(static_cast<std::int64_t>(from_hex(hex.substr(i, 8), 32)));
    return y;
}

struct Branch {
    unsigned b = 0;
    Word x = 0;
    Amplitude amp;
};

/// Post-measurement state of Samp on a uniform b after the image is measured.
struct CollapsedBranch {
    Image y;
    std::vector<Branch> branches;
};

/// Samples (b, x) uniformly, y from f'_{k,b}(x), and writes down every
/// (b', x') whose support contains y with amplitude ∝ sqrt(f'_{k,b'}(x')(y)).
/// Toy keys without a trapdoor are handled by enumerating the domain.
inline CollapsedBranch sample_collapsed(const PublicKey &pk, const SecretKey *sim, Rng &rng) {
    CollapsedBranch out;
    unsigned b = rng.bit();
    if (!pk.is_lattice()) {
        Word x = rng.bits(pk.toy.n);
        Word y = tcf::eval(pk.toy, b, x);
        out.y = {static_cast<std::int64_t>(y)};
        std::vector<std::pair<unsigned, Word>> pre;
        if (sim != nullptr) {
            for (unsigned c : {0u, 1u}) {
                if (auto xc = tcf::invert(sim->toy, c, y)) pre.emplace_back(c, *xc);
            }
        } else {
            for (unsigned c : {0u, 1u}) {
                for (Word xc = 0; xc < (Word{1} << pk.toy.n); xc++) {
                    if (tcf::eval(pk.toy, c, xc) == y) pre.emplace_back(c, xc);
                }
            }
        }
        double a = 1.0 / std::sqrt(static_cast<double>(pre.size()));
        for (auto [c, xc] : pre) out.branches.push_back({c, xc, a});
        return out;
    }
    if (sim == nullptr) throw DomainError("lattice collapsed branches need the simulation trapdoor");
    const auto &p = pk.lat.params;
    Word x = lattice::sample_preimage(p, rng);
    auto fb = lattice::ntcf_eval_density(pk.lat, b, x);
    out.y = fb.sample(rng);
    std::vector<std::pair<unsigned, Word>> pre{{b, x}};
    if (auto other = lattice::ntcf_invert(pk.lat, sim->lat, b ^ 1, out.y)) {
        if (lattice::ntcf_chk(pk.lat, b ^ 1, *other, out.y)) pre.emplace_back(b ^ 1, *other);
    }
    // Relative weights through log densities; the raw products underflow.
    std::vector<double> logs;
    for (auto [c, xc] : pre) {
        auto f = lattice::ntcf_eval_density(pk.lat, c, xc);
        double l = 0;
        for (std::size_t i = 0; i < out.y.size(); i++) {
            l += std::log(f.coordinate().pmf(lattice::centered(out.y[i] - f.center()[i], p.q)));
        }
        logs.push_back(l);
    }
    double top = *std::max_element(logs.begin(), logs.end());
    KahanSum z;
    for (auto l : logs) z += std::exp(l - top);
    for (std::size_t i = 0; i < pre.size(); i++) {
        out.branches.push_back({pre[i].first, pre[i].second, std::sqrt(std::exp(logs[i] - top) / z.value())});
    }
    std::sort(out.branches.begin(), out.branches.end(), [](const Branch &u, const Branch &v) { return u.b < v.b; });
    return out;
}

/// Loads a collapsed branch into registers (b_reg, x_reg) on top of every
/// entry of `base`, whose b_reg and x_reg must be zero.
inline SparseState load_branch(const SparseState &base, const CollapsedBranch &cb, const std::string &b_reg, const std::string &x_reg) {
    SparseState out(base.layout());
    const auto &layout = base.layout();
    for (const auto &[basis, a] : base.entries()) {
        if (layout.get(basis.regs, b_reg) != 0 || layout.get(basis.regs, x_reg) != 0) {
            throw DomainError("branch registers must start at zero");
        }
        for (const auto &br : cb.branches) {
            Word regs = layout.set(layout.set(basis.regs, b_reg, br.b), x_reg, br.x);
            out.add(Basis{regs, basis.db}, a * br.amp);
        }
    }
    return out;
}

inline constexpr double kMaxRangeEntries = 1 << 20;

/// Samp on a uniform b: Σ_{b,x,y} sqrt(f'_{k,b}(x)(y) / (2|X|)) |b,x,y⟩.
inline SparseState prepare_range_superposition(const PublicKey &pk, const RegisterLayout &layout, const std::string &b_reg = "B", const std::string &x_reg = "X",
                                               const std::string &y_reg = "Y") {
    SparseState out(layout);
    if (layout.at(x_reg).width != pk.preimage_bits() || layout.at(b_reg).width != 1) {
        throw DomainError("layout does not match key widths");
    }
    if (!pk.is_lattice()) {
        if (layout.at(y_reg).width != pk.toy.image_bits()) throw DomainError("image register width mismatch");
        if (pk.toy.n > 18) throw ParameterError("range superposition too large to materialize");
        double a = 1.0 / std::sqrt(2.0 * static_cast<double>(Word{1} << pk.toy.n));
        for (unsigned b : {0u, 1u}) {
            for (Word x = 0; x < (Word{1} << pk.toy.n); x++) {
                Word regs = layout.set(layout.set(layout.set(0, b_reg, b), x_reg, x), y_reg, tcf::eval(pk.toy, b, x));
                out.add(Basis{regs, {}}, a);
            }
        }
        return out;
    }
    const auto &p = pk.lat.params;
    unsigned digits = p.digits();
    if (layout.at(y_reg).width != p.image_coords() * digits) throw DomainError("image register width mismatch");
    double domain = std::pow(static_cast<double>(p.q), p.ring_n);
    auto probe = lattice::ntcf_eval_density(pk.lat, 0, 0);
    if (2.0 * domain * probe.support_points() > kMaxRangeEntries) throw ParameterError("range superposition too large to materialize");
    auto q_count = static_cast<std::uint64_t>(domain);
    for (unsigned b : {0u, 1u}) {
        for (std::uint64_t idx = 0; idx < q_count; idx++) {
            lattice::Coeffs xc(p.ring_n);
            std::uint64_t rest = idx;
            for (auto &c : xc) {
                c = static_cast<std::int64_t>(rest % static_cast<std::uint64_t>(p.q));
                rest /= static_cast<std::uint64_t>(p.q);
            }
            Word x = lattice::pack_preimage(p, xc);
            auto dens = lattice::ntcf_eval_density(pk.lat, b, x).to_density();
            for (const auto &[label, mass] : dens.masses()) {
                Word y = 0;
                for (unsigned i = 0; i < p.image_coords(); i++) {
                    std::uint64_t coeff = 0;
                    for (int k = 0; k < 4; k++) coeff |= std::uint64_t{static_cast<unsigned char>(label[4 * i + k])} << (8 * k);
                    y |= Word{coeff} << (i * digits);
                }
                Word regs = layout.set(layout.set(layout.set(0, b_reg, b), x_reg, x), y_reg, y);
                out.add(Basis{regs, {}}, std::sqrt(mass / (2.0 * domain)));
            }
        }
    }
    return out;
}

}  // namespace qdeny
