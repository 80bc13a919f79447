#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qdeny/common.hpp"
#include "qdeny/distances.hpp"
#include "qdeny/rng.hpp"

namespace qdeny::lattice {

using Coeffs = std::vector<std::int64_t>;

inline std::int64_t mod_q(std::int64_t v, std::int64_t q) {
    v %= q;
    return v < 0 ? v + q : v;
}

/// Representative in (−q/2, q/2].
inline std::int64_t centered(std::int64_t v, std::int64_t q) {
    v = mod_q(v, q);
    return v > q / 2 ? v - q : v;
}

inline unsigned ceil_log2(std::uint64_t q) {
    unsigned k = 0;
    while ((std::uint64_t{1} << k) < q) k++;
    return k;
}

struct GaussParams {
    unsigned n_dim = 1;
    std::int64_t q = 17;
    double B = 2.0;

    void validate() const {
        if (n_dim == 0) throw ParameterError("gaussian dimension must be positive");
        if (q < 3 || q % 2 == 0) throw ParameterError("modulus must be an odd integer ≥ 3");
        if (!(B >= 0.0) || !std::isfinite(B)) throw ParameterError("gaussian width must be finite and nonnegative");
        if (!(B * std::sqrt(static_cast<double>(n_dim)) < q / 2.0)) throw ParameterError("B·sqrt(n) must stay below q/2");
    }
};

/// One-dimensional truncated discrete Gaussian ∝ exp(−π v²/B²) on |v| ≤ B.
class Gauss1D {
   public:
    explicit Gauss1D(double B) : B_(B) {
        radius_ = static_cast<std::int64_t>(std::floor(B));
        pmf_.resize(static_cast<std::size_t>(2 * radius_ + 1));
        KahanSum z;
        for (std::int64_t v = -radius_; v <= radius_; v++) {
            double w = B > 0 ? std::exp(-M_PI * static_cast<double>(v * v) / (B * B)) : 1.0;
            pmf_[static_cast<std::size_t>(v + radius_)] = w;
            z += w;
        }
        cdf_.resize(pmf_.size());
        KahanSum run;
        for (std::size_t i = 0; i < pmf_.size(); i++) {
            pmf_[i] /= z.value();
            run += pmf_[i];
            cdf_[i] = run.value();
        }
    }

    /// Process-wide table per width; building one costs O(B) exponentials.
    static std::shared_ptr<const Gauss1D> shared(double B) {
        static std::mutex mu;
        static std::map<double, std::shared_ptr<const Gauss1D>> cache;
        std::lock_guard lock(mu);
        auto it = cache.find(B);
        if (it == cache.end()) it = cache.emplace(B, std::make_shared<const Gauss1D>(B)).first;
        return it->second;
    }

    double width() const {
        return B_;
    }
    std::int64_t radius() const {
        return radius_;
    }

    double pmf(std::int64_t v) const {
        if (v < -radius_ || v > radius_) return 0.0;
        return pmf_[static_cast<std::size_t>(v + radius_)];
    }

    std::int64_t sample(Rng &rng) const {
        double u = rng.uniform01() * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        auto i = static_cast<std::int64_t>(it - cdf_.begin());
        if (i >= static_cast<std::int64_t>(cdf_.size())) i = static_cast<std::int64_t>(cdf_.size()) - 1;
        return i - radius_;
    }

    /// Σ_v sqrt(p(v) p(v − shift)).
    double affinity(std::int64_t shift) const {
        KahanSum s;
        for (std::int64_t v = -radius_; v <= radius_; v++) {
            double p = pmf(v), q = pmf(v - shift);
            if (p > 0 && q > 0) s += std::sqrt(p * q);
        }
        return s.value();
    }

   private:
    double B_ = 0;
    std::int64_t radius_ = 0;
    std::vector<double> pmf_, cdf_;
};

/// Density of x (coordinates in centered form) under the per-coordinate
/// truncated Gaussian; 0 outside the box |x_i| ≤ B.
inline double gauss_density(const GaussParams &p, const Coeffs &x) {
    p.validate();
    if (x.size() != p.n_dim) throw DomainError("vector dimension does not match gaussian parameters");
    const Gauss1D &g = *Gauss1D::shared(p.B);
    double d = 1.0;
    for (auto v : x) d *= g.pmf(centered(v, p.q));
    return d;
}

inline Coeffs gauss_sample(const GaussParams &p, Rng &rng) {
    p.validate();
    const Gauss1D &g = *Gauss1D::shared(p.B);
    Coeffs x(p.n_dim);
    for (auto &v : x) v = g.sample(rng);
    return x;
}

/// Negacyclic polynomial arithmetic in Z_q[X]/(X^N + 1).
struct Ring {
    unsigned n = 1;
    std::int64_t q = 3;

    Coeffs zero() const {
        return Coeffs(n, 0);
    }
    Coeffs constant(std::int64_t c) const {
        Coeffs out(n, 0);
        out[0] = mod_q(c, q);
        return out;
    }
    Coeffs add(const Coeffs &a, const Coeffs &b) const {
        Coeffs out(n);
        for (unsigned i = 0; i < n; i++) out[i] = mod_q(a[i] + b[i], q);
        return out;
    }
    Coeffs sub(const Coeffs &a, const Coeffs &b) const {
        Coeffs out(n);
        for (unsigned i = 0; i < n; i++) out[i] = mod_q(a[i] - b[i], q);
        return out;
    }
    Coeffs mul(const Coeffs &a, const Coeffs &b) const {
        std::vector<__int128> acc(n, 0);
        for (unsigned i = 0; i < n; i++) {
            for (unsigned j = 0; j < n; j++) {
                __int128 p = static_cast<__int128>(a[i]) * b[j];
                unsigned k = i + j;
                if (k < n) {
                    acc[k] += p;
                } else {
                    acc[k - n] -= p;
                }
            }
        }
        Coeffs out(n);
        for (unsigned i = 0; i < n; i++) out[i] = mod_q(static_cast<std::int64_t>(acc[i] % q), q);
        return out;
    }
    Coeffs uniform(Rng &rng) const {
        Coeffs out(n);
        for (auto &c : out) c = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(q)));
        return out;
    }
};

struct LatticeParams {
    std::string name = "desk";
    unsigned ring_n = 4;
    std::int64_t q = 1048573;
    unsigned m = 22;
    double secret_width = 2.0;  // width of the key error e in u = a·s + e
    double image_width = 16384.0;  // width of the image noise of f'

    unsigned digits() const {
        return ceil_log2(static_cast<std::uint64_t>(q));
    }
    unsigned preimage_bits() const {
        return ring_n * digits();
    }
    unsigned image_coords() const {
        return m * ring_n;
    }

    /// Largest ‖error‖∞ the gadget decoder provably corrects.
    std::int64_t decode_bound() const {
        return (q - 1) / (6 * (1 + 2 * static_cast<std::int64_t>(ring_n)));
    }

    /// Constant C_T with decode guarantee ‖e‖₂ ≤ q / (C_T sqrt(N log q)).
    double trapdoor_constant() const {
        return static_cast<double>(q) / (static_cast<double>(decode_bound()) * std::sqrt(static_cast<double>(ring_n) * digits()));
    }

    void validate() const {
        if (ring_n == 0 || ring_n > 16 || (ring_n & (ring_n - 1)) != 0) throw ParameterError("ring degree must be a power of two ≤ 16");
        if (q < 3 || q % 2 == 0) throw ParameterError("modulus must be odd");
        if (m < digits() + 2) throw ParameterError("m must be at least ceil(log2 q) + 2");
        if (preimage_bits() > 100) throw ParameterError("preimage encoding wider than 100 bits");
        if (static_cast<double>(decode_bound()) < image_width + secret_width) throw ParameterError("image noise exceeds the trapdoor decoding radius");
        GaussParams{image_coords(), q, image_width}.validate();
    }

    static LatticeParams desk() {
        return {};
    }

    /// Small enough that every image density can be listed explicitly.
    static LatticeParams tiny() {
        return {"tiny", 1, 97, 9, 1.0, 1.0};
    }
};

struct LatticeKey {
    LatticeParams params;
    std::vector<Coeffs> a;  // m ring elements, a[0] = 1
    std::vector<Coeffs> u;  // a·s + e
};

struct LatticeTrapdoor {
    std::vector<Coeffs> r0, r1;  // gadget trapdoor, one pair per digit
    Coeffs s;
    std::vector<Coeffs> e;
};

inline Ring ring_of(const LatticeParams &p) {
    return Ring{p.ring_n, p.q};
}

inline std::vector<Coeffs> scale_vec(const Ring &ring, const std::vector<Coeffs> &a, const Coeffs &s) {
    std::vector<Coeffs> out;
    out.reserve(a.size());
    for (const auto &ai : a) out.push_back(ring.mul(ai, s));
    return out;
}

/// Gadget-trapdoor key: a = (1, ā, 2^j − (r0_j + ā r1_j))_j with small r.
inline std::pair<LatticeKey, LatticeTrapdoor> gen_trap(const LatticeParams &params, Rng &rng) {
    params.validate();
    Ring ring = ring_of(params);
    unsigned k = params.digits();
    LatticeKey key;
    LatticeTrapdoor td;
    key.params = params;
    Coeffs abar = ring.uniform(rng);
    key.a.push_back(ring.constant(1));
    key.a.push_back(abar);
    auto small = [&]() {
        Coeffs c(params.ring_n);
        for (auto &v : c) v = mod_q(static_cast<std::int64_t>(rng.below(3)) - 1, params.q);
        return c;
    };
    for (unsigned j = 0; j < k; j++) {
        Coeffs r0 = small(), r1 = small();
        Coeffs gj = ring.constant(static_cast<std::int64_t>(std::uint64_t{1} << j) % params.q);
        key.a.push_back(ring.sub(gj, ring.add(r0, ring.mul(abar, r1))));
        td.r0.push_back(std::move(r0));
        td.r1.push_back(std::move(r1));
    }
    for (unsigned i = k + 2; i < params.m; i++) {
        key.a.push_back(ring.uniform(rng));  // columns beyond the gadget carry no trapdoor
    }
    td.s = ring.uniform(rng);
    Gauss1D g(params.secret_width);
    key.u = scale_vec(ring, key.a, td.s);
    for (auto &ui : key.u) {
        Coeffs e(params.ring_n);
        for (auto &v : e) v = g.sample(rng);
        td.e.push_back(e);
        for (unsigned c = 0; c < params.ring_n; c++) ui[c] = mod_q(ui[c] + e[c], params.q);
    }
    return {key, td};
}

inline std::int64_t max_abs_residual(const LatticeParams &p, const std::vector<Coeffs> &v) {
    std::int64_t worst = 0;
    for (const auto &c : v)
        for (auto x : c) worst = std::max(worst, std::abs(centered(x, p.q)));
    return worst;
}

/// Recovers s from b = a·s + err by per-digit refinement through the gadget
/// rows; returns ⊥ when the re-check ‖b − a·s‖∞ ≤ decode_bound fails.
inline std::optional<Coeffs> trapdoor_invert(const LatticeKey &key, const LatticeTrapdoor &td, const std::vector<Coeffs> &b) {
    const auto &p = key.params;
    Ring ring = ring_of(p);
    unsigned k = p.digits();
    if (b.size() != p.m) throw DomainError("lattice vector length mismatch");
    std::vector<Coeffs> w;
    for (unsigned j = 0; j < k; j++) {
        w.push_back(ring.add(b[2 + j], ring.add(ring.mul(td.r0[j], b[0]), ring.mul(td.r1[j], b[1]))));
    }
    const double q = static_cast<double>(p.q);
    Coeffs s(p.ring_n);
    for (unsigned c = 0; c < p.ring_n; c++) {
        double est = static_cast<double>(w[0][c]);
        for (unsigned j = 1; j < k; j++) {
            double scale = std::ldexp(1.0, static_cast<int>(j));
            double t = std::round((scale * est - static_cast<double>(w[j][c])) / q);
            est = (static_cast<double>(w[j][c]) + t * q) / scale;
        }
        s[c] = mod_q(static_cast<std::int64_t>(std::llround(est)), p.q);
    }
    std::vector<Coeffs> resid;
    auto as = scale_vec(ring, key.a, s);
    for (unsigned i = 0; i < p.m; i++) resid.push_back(ring.sub(b[i], as[i]));
    if (max_abs_residual(p, resid) > p.decode_bound()) return std::nullopt;
    return s;
}

/// Images are m·N coefficients in [0, q); preimages are ring elements packed
/// little-endian, `digits` bits per coefficient.
using Image = std::vector<std::int64_t>;

inline Word pack_preimage(const LatticeParams &p, const Coeffs &x) {
    Word w = 0;
    for (unsigned i = 0; i < p.ring_n; i++) w |= Word(static_cast<std::uint64_t>(x[i])) << (i * p.digits());
    return w;
}

inline Coeffs unpack_preimage(const LatticeParams &p, Word w) {
    Coeffs x(p.ring_n);
    for (unsigned i = 0; i < p.ring_n; i++) {
        x[i] = static_cast<std::int64_t>((w >> (i * p.digits())) & word_mask(p.digits()));
        if (x[i] >= p.q) throw DomainError("preimage coefficient outside Z_q");
    }
    return x;
}

inline bool valid_preimage(const LatticeParams &p, Word w) {
    if ((w >> p.preimage_bits()) != 0) return false;
    for (unsigned i = 0; i < p.ring_n; i++) {
        if (static_cast<std::int64_t>((w >> (i * p.digits())) & word_mask(p.digits())) >= p.q) return false;
    }
    return true;
}

inline Image flatten(const std::vector<Coeffs> &v) {
    Image out;
    for (const auto &c : v) out.insert(out.end(), c.begin(), c.end());
    return out;
}

inline std::vector<Coeffs> unflatten(const LatticeParams &p, const Image &y) {
    if (y.size() != p.image_coords()) throw DomainError("image has wrong length");
    std::vector<Coeffs> out(p.m, Coeffs(p.ring_n));
    for (unsigned i = 0; i < p.m; i++)
        for (unsigned c = 0; c < p.ring_n; c++) out[i][c] = y[i * p.ring_n + c];
    return out;
}

/// Center a·x + b·u of the efficiently samplable f'_{k,b}(x).
inline Image sampled_center(const LatticeKey &k, unsigned b, Word x) {
    Ring ring = ring_of(k.params);
    auto ax = scale_vec(ring, k.a, unpack_preimage(k.params, x));
    if (b & 1) {
        for (unsigned i = 0; i < k.params.m; i++) ax[i] = ring.add(ax[i], k.u[i]);
    }
    return flatten(ax);
}

/// Center a·x + b·(a·s) of the exactly claw-matched f_{k,b}(x).
inline Image matched_center(const LatticeKey &k, const LatticeTrapdoor &td, unsigned b, Word x) {
    Ring ring = ring_of(k.params);
    auto xs = unpack_preimage(k.params, x);
    if (b & 1) xs = ring.add(xs, td.s);
    return flatten(scale_vec(ring, k.a, xs));
}

/// Product density: independent truncated Gaussians around a center.
class ImageDensity {
   public:
    ImageDensity(Image center, double width, std::int64_t q) : center_(std::move(center)), q_(q), g_(Gauss1D::shared(width)) {
    }

    const Image &center() const {
        return center_;
    }
    const Gauss1D &coordinate() const {
        return *g_;
    }

    double operator()(const Image &y) const {
        if (y.size() != center_.size()) return 0.0;
        double d = 1.0;
        for (std::size_t i = 0; i < y.size(); i++) {
            d *= g_->pmf(centered(y[i] - center_[i], q_));
            if (d == 0.0) return 0.0;
        }
        return d;
    }

    bool in_support(const Image &y) const {
        if (y.size() != center_.size()) return false;
        for (std::size_t i = 0; i < y.size(); i++) {
            if (std::abs(centered(y[i] - center_[i], q_)) > g_->radius()) return false;
        }
        return true;
    }

    Image sample(Rng &rng) const {
        Image y(center_.size());
        for (std::size_t i = 0; i < y.size(); i++) y[i] = mod_q(center_[i] + g_->sample(rng), q_);
        return y;
    }

    double support_points() const {
        return std::pow(2.0 * static_cast<double>(g_->radius()) + 1.0, static_cast<double>(center_.size()));
    }

    /// Explicit density keyed by image labels; refuses supports above 2^18.
    distances::Density to_density() const {
        if (support_points() > static_cast<double>(1 << 18)) throw ParameterError("image support too large to enumerate");
        std::map<std::string, double> mass;
        std::int64_t r = g_->radius();
        Image off(center_.size(), -r);
        while (true) {
            Image y(center_.size());
            double d = 1.0;
            for (std::size_t i = 0; i < y.size(); i++) {
                y[i] = mod_q(center_[i] + off[i], q_);
                d *= g_->pmf(off[i]);
            }
            mass[label(y)] = d;
            std::size_t i = 0;
            while (i < off.size() && off[i] == r) off[i++] = -r;
            if (i == off.size()) break;
            off[i]++;
        }
        return distances::Density(std::move(mass));
    }

    static std::string label(const Image &y) {
        std::string s;
        for (auto v : y) {
            for (int b = 0; b < 4; b++) s.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * b)) & 0xFF));
        }
        return s;
    }

   private:
    Image center_;
    std::int64_t q_;
    std::shared_ptr<const Gauss1D> g_;
};

/// Exact H² of two equal-width product densities, via per-coordinate affinities.
inline double hellinger_sq(const ImageDensity &f1, const ImageDensity &f2, std::int64_t q) {
    if (f1.center().size() != f2.center().size()) throw DomainError("image densities of different dimension");
    std::map<std::int64_t, double> cache;
    double affinity = 1.0;
    for (std::size_t i = 0; i < f1.center().size(); i++) {
        std::int64_t shift = centered(f2.center()[i] - f1.center()[i], q);
        auto it = cache.find(shift);
        if (it == cache.end()) it = cache.emplace(shift, f1.coordinate().affinity(shift)).first;
        affinity *= it->second;
    }
    return std::clamp(1.0 - affinity, 0.0, 1.0);
}

/// f'_{k,b}(x): Gaussian of width image_width around a·x + b·u.
inline ImageDensity ntcf_eval_density(const LatticeKey &k, unsigned b, Word x) {
    return ImageDensity(sampled_center(k, b, x), k.params.image_width, k.params.q);
}

/// f_{k,b}(x): same width around a·x + b·(a·s); needs the secret.
inline ImageDensity ntcf_matched_density(const LatticeKey &k, const LatticeTrapdoor &td, unsigned b, Word x) {
    return ImageDensity(matched_center(k, td, b, x), k.params.image_width, k.params.q);
}

inline unsigned ntcf_chk(const LatticeKey &k, unsigned b, Word x, const Image &y) {
    if (!valid_preimage(k.params, x)) return 0;
    return ntcf_eval_density(k, b, x).in_support(y) ? 1 : 0;
}

/// Inverts y − b·u with the gadget trapdoor. Accepts residuals up to the
/// union of both supports (image width plus key error), else ⊥.
inline std::optional<Word> ntcf_invert(const LatticeKey &k, const LatticeTrapdoor &td, unsigned b, const Image &y) {
    const auto &p = k.params;
    if (y.size() != p.image_coords()) return std::nullopt;
    Ring ring = ring_of(p);
    auto target = unflatten(p, y);
    if (b & 1) {
        for (unsigned i = 0; i < p.m; i++) target[i] = ring.sub(target[i], k.u[i]);
    }
    auto x = trapdoor_invert(k, td, target);
    if (!x) return std::nullopt;
    auto ax = scale_vec(ring, k.a, *x);
    std::vector<Coeffs> resid;
    for (unsigned i = 0; i < p.m; i++) resid.push_back(ring.sub(target[i], ax[i]));
    auto window = static_cast<std::int64_t>(std::floor(p.image_width)) + static_cast<std::int64_t>(std::floor(p.secret_width));
    if (max_abs_residual(p, resid) > window) return std::nullopt;
    return pack_preimage(p, *x);
}

inline Word sample_preimage(const LatticeParams &p, Rng &rng) {
    return pack_preimage(p, ring_of(p).uniform(rng));
}

/// E_x H²(f_{k,b}(x), f'_{k,b}(x)); independent of x because both centers move together.
inline double hellinger_gap(const LatticeKey &k, const LatticeTrapdoor &td, unsigned b) {
    Word x0 = 0;
    return hellinger_sq(ntcf_matched_density(k, td, b, x0), ntcf_eval_density(k, b, x0), k.params.q);
}

}  // namespace qdeny::lattice
