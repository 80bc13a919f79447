#include <gtest/gtest.h>

#include <cmath>

#include "qdeny/distances.hpp"
#include "qdeny/experiments.hpp"
#include "qdeny/rng.hpp"

using namespace qdeny;
using distances::Density;

namespace {

Density point(const std::string &label) {
    return Density({{label, 1.0}});
}

}  // namespace

// {a:1} vs {a:1/2, b:1/2}: affinity sqrt(1/2), so H^2 = 1 - 0.70711 = 0.29289,
// TV = 1/2, superposition bound sqrt(1 - 1/2) = 0.70711.
TEST(Distances, FrozenPointVersusCoin) {
    Density f1 = point("a");
    Density f2({{"a", 0.5}, {"b", 0.5}});
    EXPECT_NEAR(distances::hellinger_sq(f1, f2), 0.2928932188134524, 1e-15);
    EXPECT_NEAR(distances::tv_distance(f1, f2), 0.5, 1e-15);
    EXPECT_NEAR(distances::superposition_trace_bound(f1, f2), 0.7071067811865476, 1e-15);
}

TEST(Distances, IdenticalAndDisjoint) {
    Density f({{"x", 0.25}, {"y", 0.75}});
    EXPECT_EQ(distances::hellinger_sq(f, f), 0.0);
    EXPECT_EQ(distances::tv_distance(f, f), 0.0);
    EXPECT_NEAR(distances::superposition_trace_bound(f, f), 0.0, 1e-7);
    EXPECT_EQ(distances::hellinger_sq(point("a"), point("b")), 1.0);
    EXPECT_EQ(distances::tv_distance(point("a"), point("b")), 1.0);
    EXPECT_EQ(distances::superposition_trace_bound(point("a"), point("b")), 1.0);
}

TEST(Distances, RejectsInvalidDensities) {
    EXPECT_THROW(Density({{"a", 0.5}}), DomainError);
    EXPECT_THROW(Density({{"a", 1.5}, {"b", -0.5}}), DomainError);
    EXPECT_THROW(Density({{"a", std::nan("")}}), DomainError);
    EXPECT_THROW(Density::from_weights({{"a", 0.0}}), DomainError);
    EXPECT_NO_THROW(Density({{"a", 0.5 + 1e-10}, {"b", 0.5}}));
}

TEST(Distances, FromWeightsNormalizes) {
    auto f = Density::from_weights({{"a", 2.0}, {"b", 6.0}});
    EXPECT_DOUBLE_EQ(f("a"), 0.25);
    EXPECT_DOUBLE_EQ(f("b"), 0.75);
    EXPECT_EQ(f("c"), 0.0);
}

TEST(Distances, InequalitiesOnRandomPairs) {
    for (std::uint64_t i = 0; i < 500; i++) {
        Rng rng = Rng::substream(17, i);
        auto f1 = exp::random_density(rng), f2 = exp::random_density(rng);
        double h2 = distances::hellinger_sq(f1, f2);
        double tv = distances::tv_distance(f1, f2);
        EXPECT_LE(h2, tv + 1e-12);
        EXPECT_LE(tv, std::sqrt(2 * h2) + 1e-12);
        EXPECT_NEAR(h2, distances::hellinger_sq(f2, f1), 1e-15);
        EXPECT_NEAR(tv, distances::tv_distance(f2, f1), 1e-15);
        // Nonnegative amplitudes make the pure-state distance meet the bound.
        auto [p1, p2] = distances::amplitude_encode(f1, f2);
        EXPECT_NEAR(distances::trace_distance_pure(p1, p2), distances::superposition_trace_bound(f1, f2), 1e-7);
    }
}

TEST(Distances, TraceDistanceNeedsNormalizedStates) {
    RegisterLayout layout{{"L", 1}};
    SparseState a(layout), b = SparseState::basis_state(layout);
    a.add(Basis{0, {}}, 0.5);
    EXPECT_THROW(distances::trace_distance_pure(a, b), DomainError);
}

TEST(Distances, MarginalTracesOutOtherRegisters) {
    RegisterLayout layout{{"A", 1}, {"B", 1}};
    SparseState s(layout);
    s.add(Basis{layout.set(0, "A", 0), {}}, std::sqrt(0.2));
    s.add(Basis{layout.set(layout.set(0, "A", 1), "B", 1), {}}, std::sqrt(0.3));
    s.add(Basis{layout.set(0, "A", 1), {}}, std::sqrt(0.5));
    auto m = distances::marginal(s, {"A"});
    ASSERT_EQ(m.support_size(), 2u);
    double total = 0;
    for (const auto &[label, p] : m.masses()) total += p;
    EXPECT_NEAR(total, 1.0, 1e-15);
    EXPECT_NEAR(std::min(m.masses().begin()->second, std::next(m.masses().begin())->second), 0.2, 1e-12);
}
