#include <gtest/gtest.h>

#include "qdeny/experiments.hpp"

using namespace qdeny;
using namespace qdeny::exp;

TEST(Config, ParsesAndRejectsUnknownFields) {
    auto c = ExperimentConfig::from_json({{"seed", 5}, {"trials", 20}, {"family", "injective"}, {"profile", "fast"}});
    EXPECT_EQ(c.seed_value(), 5u);
    EXPECT_EQ(c.trials_or(1000), 20u);
    EXPECT_EQ(c.family, "injective");
    EXPECT_THROW(ExperimentConfig::from_json({{"seed", 1}, {"sneaky", true}}), ParameterError);
    EXPECT_THROW(ExperimentConfig::from_json({{"seed", "one"}}), ParameterError);
    EXPECT_THROW(ExperimentConfig::from_json({{"profile", "slow"}}), ParameterError);
    EXPECT_THROW(ExperimentConfig::from_json({{"family", "nope"}}), ParameterError);
    EXPECT_THROW(ExperimentConfig::from_json(json::array()), ParameterError);
}

TEST(Config, SeedIsMandatoryAndProfileScales) {
    ExperimentConfig c;
    EXPECT_THROW(c.seed_value(), ParameterError);
    c.profile = "fast";
    EXPECT_EQ(c.trials_or(1000), 100u);
    c.profile = "full";
    EXPECT_EQ(c.trials_or(1000), 1000u);
    EXPECT_THROW(distance_toolbox(c), ParameterError);
}

TEST(ReportTest, JsonShape) {
    ExperimentConfig c;
    c.seed = 3;
    c.trials = 50;
    auto r = distance_toolbox(c);
    auto j = r.to_json();
    for (const char *k : {"schema_version", "tool_version", "experiment", "config", "metrics", "criteria", "passed", "notes", "wall_clock_seconds"}) {
        EXPECT_TRUE(j.contains(k)) << k;
    }
    ASSERT_EQ(j["criteria"].size(), 1u);
    EXPECT_EQ(j["criteria"][0]["id"], "9");
    EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(ReportTest, MetricsAreDeterministic) {
    ExperimentConfig c;
    c.seed = 11;
    c.trials = 5;
    c.L = 3;
    EXPECT_EQ(bound_check(c).metrics, bound_check(c).metrics);
    c.trials = 40;
    c.strategy = "honest";
    EXPECT_EQ(extraction(c).metrics, extraction(c).metrics);
}

TEST(ReportTest, RuntimeLimitFailsCriterion) {
    Stopwatch sw;
    auto c = make_criterion("x", "slow", true, 0, 0, sw, -1.0);
    EXPECT_FALSE(c.passed);
}

TEST(Circuits, QueryCountsAndLayout) {
    std::array<int, 4> counts{};
    for (std::uint64_t i = 0; i < 200; i++) {
        Rng rng = Rng::substream(1, i);
        auto c = random_circuit(3, 3, rng);
        ASSERT_LE(c.queries(), 3u);
        counts[c.queries()]++;
    }
    for (int q = 0; q < 4; q++) EXPECT_GT(counts[q], 20) << q;
    EXPECT_EQ(circuit_layout(3).total_width(), kCircuitQubits);
    EXPECT_THROW(random_circuit(5, 1, *std::make_unique<Rng>(1)), ParameterError);
}

TEST(Experiments, DeniabilityOnClawFreeKeysIsInformational) {
    ExperimentConfig c;
    c.seed = 2;
    c.trials = 3;
    c.n = 5;
    auto r = deniability(c);
    ASSERT_EQ(r.criteria.size(), 1u);
    EXPECT_EQ(r.criteria[0].id, "3x");
    c.family = "lattice";
    EXPECT_THROW(deniability(c), ParameterError);
}
