#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "qdeny/distances.hpp"
#include "qdeny/family.hpp"
#include "qdeny/lattice_ntcf.hpp"

using namespace qdeny;
using namespace qdeny::lattice;

TEST(Gauss, PmfIsNormalizedAndSymmetric) {
    for (double B : {0.0, 1.0, 2.5, 7.0, 16384.0}) {
        Gauss1D g(B);
        KahanSum z;
        for (auto v = -g.radius(); v <= g.radius(); v++) {
            z += g.pmf(v);
            EXPECT_DOUBLE_EQ(g.pmf(v), g.pmf(-v));
        }
        EXPECT_NEAR(z.value(), 1.0, 1e-12);
        EXPECT_EQ(g.pmf(g.radius() + 1), 0.0);
    }
    // exp(-pi) relative weight at |v| = B = 1.
    Gauss1D g(1.0);
    EXPECT_NEAR(g.pmf(1) / g.pmf(0), std::exp(-M_PI), 1e-15);
}

TEST(Gauss, SamplerPassesChiSquare) {
    Gauss1D g(6.0);
    Rng rng(1234);
    const int n = 200000;
    std::vector<double> counts(static_cast<std::size_t>(2 * g.radius() + 1), 0);
    for (int i = 0; i < n; i++) {
        auto v = g.sample(rng);
        ASSERT_LE(std::abs(v), g.radius());
        counts[static_cast<std::size_t>(v + g.radius())]++;
    }
    double stat = 0;
    for (std::size_t i = 0; i < counts.size(); i++) {
        double expected = n * g.pmf(static_cast<std::int64_t>(i) - g.radius());
        stat += (counts[i] - expected) * (counts[i] - expected) / expected;
    }
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    double p_value = boost::math::cdf(boost::math::complement(dist, stat));
    EXPECT_GT(p_value, 1e-4) << "chi-square " << stat;
}

TEST(GaussParamsTest, Validation) {
    EXPECT_THROW((GaussParams{1, 16, 2.0}.validate()), ParameterError);
    EXPECT_THROW((GaussParams{4, 17, 5.0}.validate()), ParameterError);
    EXPECT_NO_THROW((GaussParams{4, 17, 2.0}.validate()));
    GaussParams p{2, 17, 2.0};
    EXPECT_EQ(gauss_density(p, {3, 0}), 0.0);
    Gauss1D g(2.0);
    EXPECT_NEAR(gauss_density(p, {1, 16}), g.pmf(1) * g.pmf(-1), 1e-15);
}

// (q - 1) / (6 (1 + 2N)) = 1048572 / 54 = 19418 exactly; 20 digits per coefficient.
TEST(LatticeParamsTest, DeskValues) {
    auto p = LatticeParams::desk();
    EXPECT_NO_THROW(p.validate());
    EXPECT_EQ(p.digits(), 20u);
    EXPECT_EQ(p.preimage_bits(), 80u);
    EXPECT_EQ(p.image_coords(), 88u);
    EXPECT_EQ(p.decode_bound(), 19418);
    EXPECT_NEAR(p.trapdoor_constant(), 1048573.0 / (19418.0 * std::sqrt(80.0)), 1e-12);
}

TEST(LatticeParamsTest, RejectsBadParameters) {
    auto p = LatticeParams::desk();
    p.m = p.digits() + 1;
    EXPECT_THROW(p.validate(), ParameterError);
    p = LatticeParams::desk();
    p.image_width = 30000;
    EXPECT_THROW(p.validate(), ParameterError);
    p = LatticeParams::desk();
    p.ring_n = 3;
    EXPECT_THROW(p.validate(), ParameterError);
    p = LatticeParams::desk();
    p.q = 1048576;
    EXPECT_THROW(p.validate(), ParameterError);
}

TEST(RingTest, ArithmeticModQ) {
    Ring r = ring_of(LatticeParams::desk());
    Rng rng(2);
    auto a = r.uniform(rng), b = r.uniform(rng), c = r.uniform(rng);
    EXPECT_EQ(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
    EXPECT_EQ(r.sub(r.add(a, b), b), a);
    EXPECT_EQ(r.mul(a, r.constant(1)), a);
    // Negacyclic: X^N = -1.
    Coeffs x(4, 0);
    x[1] = 1;
    auto x4 = r.mul(r.mul(x, x), r.mul(x, x));
    EXPECT_EQ(x4, r.constant(r.q - 1));
}

class TinyLattice : public ::testing::Test {
   protected:
    SecretKey sk = keygen(tcf::Family::LatticeNtcf, 0, 8, LatticeParams::tiny());
};

TEST_F(TinyLattice, DensitiesAreNormalizedAndMatchChk) {
    const auto &k = sk.pk.lat;
    Rng rng(3);
    for (int t = 0; t < 6; t++) {
        unsigned b = static_cast<unsigned>(t & 1);
        Word x = sample_preimage(k.params, rng);
        auto f = ntcf_eval_density(k, b, x);
        auto dens = f.to_density();
        KahanSum total;
        for (const auto &[label, mass] : dens.masses()) total += mass;
        EXPECT_NEAR(total.value(), 1.0, 1e-9);
        EXPECT_EQ(static_cast<double>(dens.support_size()), f.support_points());
        for (int s = 0; s < 500; s++) {
            Image y = f.center();
            for (auto &c : y) c = mod_q(c + static_cast<std::int64_t>(rng.below(5)) - 2, k.params.q);
            EXPECT_EQ(ntcf_chk(k, b, x, y) == 1, f(y) > 0);
        }
    }
}

TEST_F(TinyLattice, ProductHellingerMatchesEnumeration) {
    const auto &k = sk.pk.lat;
    for (unsigned b : {0u, 1u}) {
        auto f = ntcf_matched_density(k, sk.lat, b, 5);
        auto g = ntcf_eval_density(k, b, 5);
        EXPECT_NEAR(hellinger_sq(f, g, k.params.q), distances::hellinger_sq(f.to_density(), g.to_density()), 1e-12);
    }
}

class DeskLattice : public ::testing::Test {
   protected:
    SecretKey sk = keygen(tcf::Family::LatticeNtcf, 0, 42);
};

TEST_F(DeskLattice, KeyShape) {
    const auto &k = sk.pk.lat;
    ASSERT_EQ(k.a.size(), k.params.m);
    EXPECT_EQ(k.a[0], ring_of(k.params).constant(1));
    EXPECT_LE(max_abs_residual(k.params, sk.lat.e), static_cast<std::int64_t>(k.params.secret_width));
}

TEST_F(DeskLattice, InvertsBothPreimages) {
    const auto &k = sk.pk.lat;
    Ring ring = ring_of(k.params);
    Rng rng(77);
    for (int t = 0; t < 300; t++) {
        unsigned b = rng.bit();
        Word x = sample_preimage(k.params, rng);
        auto y = ntcf_eval_density(k, b, x).sample(rng);
        EXPECT_EQ(ntcf_chk(k, b, x, y), 1u);
        auto mine = ntcf_invert(k, sk.lat, b, y);
        ASSERT_TRUE(mine.has_value());
        EXPECT_EQ(*mine, x);
        auto xs = unpack_preimage(k.params, x);
        Word partner = pack_preimage(k.params, b == 0 ? ring.sub(xs, sk.lat.s) : ring.add(xs, sk.lat.s));
        auto theirs = ntcf_invert(k, sk.lat, b ^ 1, y);
        ASSERT_TRUE(theirs.has_value());
        EXPECT_EQ(*theirs, partner);
    }
}

TEST_F(DeskLattice, RandomImagesDoNotInvert) {
    const auto &k = sk.pk.lat;
    Rng rng(8);
    Image y(k.params.image_coords());
    for (auto &c : y) c = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(k.params.q)));
    EXPECT_FALSE(ntcf_invert(k, sk.lat, 0, y).has_value());
    EXPECT_FALSE(ntcf_invert(k, sk.lat, 0, Image(3, 0)).has_value());
}

TEST_F(DeskLattice, HellingerGapIsSmall) {
    for (unsigned b : {0u, 1u}) {
        double gap = hellinger_gap(sk.pk.lat, sk.lat, b);
        EXPECT_GE(gap, 0.0);
        EXPECT_LT(gap, 1e-3);
    }
    EXPECT_EQ(hellinger_gap(sk.pk.lat, sk.lat, 0), 0.0);
}
