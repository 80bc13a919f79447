#include <gtest/gtest.h>

#include <cmath>

#include "qdeny/compressed_oracle.hpp"
#include "qdeny/distances.hpp"
#include "qdeny/experiments.hpp"

using namespace qdeny;

namespace {

constexpr double kH = 0.7071067811865476;

RegisterLayout query_layout(unsigned n) {
    return RegisterLayout{{"X", n}, {"E", 1}};
}

SparseState query_input(unsigned n, Word x, unsigned e) {
    auto layout = query_layout(n);
    return SparseState::basis_state(layout, layout.set(layout.set(0, "X", x), "E", e));
}

}  // namespace

TEST(StdDecomp, IsAnInvolution) {
    auto layout = query_layout(3);
    SparseState s(layout);
    s.add(Basis{0, Database({{2, 1}})}, std::sqrt(0.4));
    s.add(Basis{1, {}}, std::sqrt(0.6));
    for (Word x : {Word{2}, Word{5}}) {
        auto back = oracle::std_decomp(oracle::std_decomp(s, x), x);
        EXPECT_NEAR(distance_sq(back, s), 0.0, 1e-24);
    }
}

TEST(StdDecomp, AbsentInputOpensUniformSuperposition) {
    auto s = oracle::std_decomp(query_input(2, 1, 0), 3);
    ASSERT_EQ(s.size(), 2u);
    for (const auto &[b, a] : s.entries()) {
        ASSERT_EQ(b.db.size(), 1u);
        EXPECT_EQ(b.db.entries()[0].x, Word{3});
        EXPECT_NEAR(std::abs(a - kH), 0, 1e-15);
    }
}

// First query on |x, e=1>|empty>: the database records x in the |-> pattern,
// (|x,0> - |x,1>)/sqrt 2, and nothing else survives.
TEST(CompressedPhase, SingleQuery) {
    auto s = oracle::cpho_query(query_input(3, 6, 1), "X", "E");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_NEAR(std::abs(s.amplitude(Basis{s.entries().begin()->first.regs, Database({{6, 0}})}) - kH), 0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude(Basis{s.entries().begin()->first.regs, Database({{6, 1}})}) + kH), 0, 1e-15);
}

TEST(CompressedPhase, DoubleQueryReturnsToEmptyDatabase) {
    auto s = oracle::cpho_query(oracle::cpho_query(query_input(3, 6, 1), "X", "E"), "X", "E");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_TRUE(s.entries().begin()->first.db.empty());
    EXPECT_NEAR(std::abs(s.entries().begin()->second - 1.0), 0, 1e-15);
}

TEST(CompressedPhase, ZeroControlIsIdentity) {
    auto in = query_input(3, 6, 0);
    auto s = oracle::cpho_query(in, "X", "E");
    EXPECT_NEAR(distance_sq(s, in), 0.0, 1e-24);
}

TEST(CompressedPhase, BudgetIsEnforced) {
    oracle::CompressedOracle o(1);
    auto s = o.phase_query(query_input(2, 1, 1), "X", "E");
    EXPECT_EQ(o.issued(), 1u);
    EXPECT_THROW(o.phase_query(s, "X", "E"), DomainError);
}

TEST(CompressedPhase, DatabasesStayCanonicalAndBounded) {
    RegisterLayout layout = query_layout(3);
    auto s = qsim::hadamard_all(SparseState::basis_state(layout), {"X", "E"});
    oracle::CompressedOracle o(3);
    for (int q = 0; q < 3; q++) {
        s = o.phase_query(s, "X", "E");
        s = qsim::apply_single_qubit(s, "X", static_cast<unsigned>(q), {kH, kH, kH, -kH});
        EXPECT_TRUE(oracle::databases_canonical(s));
        EXPECT_LE(oracle::max_database_size(s), static_cast<std::size_t>(q + 1));
        EXPECT_NEAR(s.norm_sq(), 1.0, 1e-12);
    }
}

// Deutsch's problem on one input bit: the outcome is H(0) xor H(1), which is
// a fair coin for a uniformly random H.
TEST(CompressedStandard, DeutschDistribution) {
    RegisterLayout layout{{"X", 1}, {"T", 1}};
    auto s = SparseState::basis_state(layout, layout.set(0, "T", 1));
    s = qsim::hadamard_all(s, {"X", "T"});
    oracle::CompressedOracle o(1);
    s = o.standard_query(s, "X", "T");
    s = qsim::hadamard_all(s, {"X"});
    auto m = distances::marginal(s, {"X"});
    ASSERT_EQ(m.support_size(), 2u);
    for (const auto &[label, p] : m.masses()) EXPECT_NEAR(p, 0.5, 1e-12);
}

TEST(OracleEquivalence, RandomCircuitsAgree) {
    for (std::uint64_t i = 0; i < 12; i++) {
        Rng rng = Rng::substream(4242, i);
        auto c = exp::random_circuit(i % 2 ? 3 : 2, 3, rng);
        EXPECT_LE(c.queries(), 3u);
        double tv = distances::tv_distance(exp::run_circuit(c, false), exp::run_circuit(c, true));
        EXPECT_LE(tv, 1e-9) << "circuit " << i;
    }
}

TEST(OracleEquivalence, FullOracleOutputIsNormalized) {
    Rng rng(1);
    auto c = exp::random_circuit(3, 3, rng);
    auto f = exp::run_circuit(c, false);
    KahanSum z;
    for (const auto &[label, p] : f.masses()) z += p;
    EXPECT_NEAR(z.value(), 1.0, 1e-12);
}

TEST(OracleValues, MeasuringFixesConsistentValues) {
    auto s = oracle::cpho_query(query_input(3, 6, 1), "X", "E");
    Rng rng(5);
    auto values = oracle::measure_oracle_values(s, {6, 2}, rng);
    ASSERT_EQ(values.size(), 2u);
    for (const auto &[b, a] : s.entries()) {
        EXPECT_EQ(b.db.find(6)->v, values[6]);
        EXPECT_EQ(b.db.find(2)->v, values[2]);
    }
    EXPECT_NEAR(s.norm_sq(), 1.0, 1e-12);
}
