#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "qdeny/family.hpp"
#include "qdeny/qsim.hpp"

using namespace qdeny;

namespace {

constexpr double kH = 0.7071067811865476;

}  // namespace

TEST(Qsim, HadamardOnZero) {
    RegisterLayout layout{{"A", 1}};
    auto s = qsim::hadamard_all(SparseState::basis_state(layout), {"A"});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_NEAR(std::abs(s.amplitude(Basis{0, {}}) - kH), 0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude(Basis{1, {}}) - kH), 0, 1e-15);
    // H·H = I, with the cancelled branch pruned.
    auto back = qsim::hadamard_all(s, {"A"});
    ASSERT_EQ(back.size(), 1u);
    EXPECT_NEAR(std::abs(back.amplitude(Basis{0, {}}) - 1.0), 0, 1e-15);
}

TEST(Qsim, CnotTruthTable) {
    RegisterLayout layout{{"C", 1}, {"T", 1}};
    for (Word c : {0, 1}) {
        for (Word t : {0, 1}) {
            Word regs = layout.set(layout.set(0, "C", c), "T", t);
            auto s = qsim::apply_cnot(SparseState::basis_state(layout, regs), "C", 0, "T", 0);
            ASSERT_EQ(s.size(), 1u);
            EXPECT_EQ(layout.get(s.entries().begin()->first.regs, "T"), t ^ c);
            EXPECT_EQ(layout.get(s.entries().begin()->first.regs, "C"), c);
        }
    }
}

TEST(Qsim, RandomUnitaryIsUnitary) {
    Rng rng(5);
    for (int k = 0; k < 50; k++) {
        auto u = qsim::random_unitary(rng);
        // Rows orthonormal.
        EXPECT_NEAR(std::norm(u[0]) + std::norm(u[1]), 1.0, 1e-12);
        EXPECT_NEAR(std::norm(u[2]) + std::norm(u[3]), 1.0, 1e-12);
        EXPECT_NEAR(std::abs(u[0] * std::conj(u[2]) + u[1] * std::conj(u[3])), 0.0, 1e-12);
    }
}

TEST(Qsim, SingleQubitGatePreservesNorm) {
    RegisterLayout layout{{"A", 3}};
    Rng rng(9);
    auto s = qsim::hadamard_all(SparseState::basis_state(layout), {"A"});
    for (unsigned bit = 0; bit < 3; bit++) s = qsim::apply_single_qubit(s, "A", bit, qsim::random_unitary(rng));
    EXPECT_NEAR(s.norm_sq(), 1.0, 1e-12);
}

TEST(Qsim, XorAndProject) {
    RegisterLayout layout{{"A", 4}};
    auto s = qsim::xor_value(SparseState::basis_state(layout, 0b0101), "A", 0b0011);
    EXPECT_EQ(s.entries().begin()->first.regs, Word{0b0110});
    auto h = qsim::hadamard_all(SparseState::basis_state(layout), {"A"});
    auto p = qsim::project(h, "A", 3);
    EXPECT_NEAR(p.norm_sq, 1.0 / 16, 1e-15);
}

TEST(Qsim, MeasureHadamardMatchesExplicitTransform) {
    RegisterLayout layout{{"B", 1}, {"X", 3}};
    Rng rng(21);
    SparseState s(layout);
    s.add(Basis{layout.set(0, "X", 5), {}}, std::sqrt(0.3));
    s.add(Basis{layout.set(layout.set(0, "B", 1), "X", 2), {}}, std::complex<double>(0, std::sqrt(0.7)));
    auto explicit_state = qsim::hadamard_all(s, {"B", "X"});
    for (int k = 0; k < 40; k++) {
        auto hm = qsim::measure_hadamard(s, {"B", "X"}, rng);
        Word regs = layout.set(layout.set(0, "B", hm.values[0]), "X", hm.values[1]);
        EXPECT_NEAR(hm.probability, std::norm(explicit_state.amplitude(Basis{regs, {}})), 1e-12);
    }
}

TEST(Qsim, MeasureCollapses) {
    RegisterLayout layout{{"A", 2}};
    Rng rng(3);
    auto s = qsim::hadamard_all(SparseState::basis_state(layout), {"A"});
    auto m = qsim::measure(s, "A", rng);
    EXPECT_NEAR(m.probability, 0.25, 1e-15);
    ASSERT_EQ(m.post_state.size(), 1u);
    EXPECT_EQ(m.post_state.entries().begin()->first.regs, m.value);
}

// Samp for the exact claw-free family with n = 2: 2 choices of b times 4 of x,
// each with amplitude 1/sqrt(8), and the image register holding f_b(x).
TEST(Qsim, RangeSuperpositionExactClawFreeN2) {
    auto sk = keygen(tcf::Family::ExactClawFree, 2, 1);
    RegisterLayout layout{{"B", 1}, {"X", 2}, {"Y", sk.pk.toy.image_bits()}};
    auto s = prepare_range_superposition(sk.pk, layout);
    ASSERT_EQ(s.size(), 8u);
    for (const auto &[b, a] : s.entries()) {
        EXPECT_NEAR(std::abs(a - 1.0 / std::sqrt(8.0)), 0, 1e-15);
        Word y = layout.get(b.regs, "Y");
        EXPECT_EQ(tcf::eval(sk.pk.toy, static_cast<unsigned>(layout.get(b.regs, "B")), layout.get(b.regs, "X")), y);
    }
}
