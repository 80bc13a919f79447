#include <gtest/gtest.h>

#include <cmath>

#include "qdeny/rigidity.hpp"

using namespace qdeny;
using namespace qdeny::rigidity;

namespace {

bool distinct_claws(const unexp::EquationContext &ctx) {
    for (std::size_t i = 0; i < ctx.size(); i++) {
        for (std::size_t j = i + 1; j < ctx.size(); j++) {
            const auto &a = *ctx.claws[i], &b = *ctx.claws[j];
            if (a.x0 == b.x0 || a.x0 == b.x1 || a.x1 == b.x0 || a.x1 == b.x1) return false;
        }
    }
    return true;
}

}  // namespace

TEST(Strategy, ParseAndName) {
    EXPECT_EQ(ProverStrategy::parse("honest").name(), "honest");
    EXPECT_EQ(ProverStrategy::parse("noquery").kind, StrategyKind::NoQueryGuess);
    EXPECT_EQ(ProverStrategy::parse("mixture").kind, StrategyKind::Mixture);
    auto p = ProverStrategy::parse("partial:2");
    EXPECT_EQ(p.kind, StrategyKind::PartialQuery);
    EXPECT_EQ(p.l, 2u);
    EXPECT_EQ(p.name(), "partial:2");
    for (const char *bad : {"", "partial:", "partial:-1", "partial:2x", "greedy"}) EXPECT_THROW(ProverStrategy::parse(bad), ParameterError) << bad;
    EXPECT_EQ(ProverStrategy::honest().queries(3), 3u);
    EXPECT_EQ(ProverStrategy::partial(5).queries(3), 3u);
    EXPECT_EQ(ProverStrategy::no_query().queries(3), 0u);
}

TEST(Prover, RejectsBadRuns) {
    auto sk = keygen(tcf::Family::ExactClawFree, 6, 1);
    Rng rng(1);
    EXPECT_THROW(run_prover(ProverStrategy::honest(), sk, 2, RunMode::Coherent, rng), ParameterError);
    EXPECT_THROW(run_prover(ProverStrategy::honest(), sk, 5, RunMode::Measured, rng), ParameterError);
    EXPECT_THROW(run_prover(ProverStrategy::partial(3), sk, 2, RunMode::Measured, rng), ParameterError);
    EXPECT_THROW(run_prover(ProverStrategy::custom_step("empty", {}), sk, 1, RunMode::Measured, rng), ParameterError);
}

TEST(Prover, HonestMeasuredRunIsAnHonestCiphertext) {
    auto sk = keygen(tcf::Family::ExactClawFree, 8, 2);
    for (std::uint64_t t = 0; t < 20; t++) {
        Rng rng = Rng::substream(3, t);
        auto run = run_prover(ProverStrategy::honest(), sk, 3, RunMode::Measured, rng);
        EXPECT_NEAR(unexp::validity(run.state, run.ctx), 1.0, 1e-10);
        auto c = measured_ciphertext(run);
        EXPECT_EQ(c.size(), 3u);
    }
}

TEST(XorStructure, HonestStateHasZeroResidual) {
    for (std::uint64_t k = 0; k < 10; k++) {
        auto sk = keygen(tcf::Family::ExactClawFree, 7, k);
        Rng rng(k);
        auto run = run_prover(ProverStrategy::honest(), sk, 1, RunMode::Coherent, rng);
        auto rep = check_xor_structure(run.state, run.ctx, 0);
        EXPECT_LE(rep.residual, 1e-10);
        EXPECT_NEAR(rep.validity, 1.0, 1e-10);
        EXPECT_TRUE(rep.bound_holds);
        auto dec = decompose_state(run.state, run.ctx, 0);
        EXPECT_NEAR(dec.coefficient_total(), 1.0, 1e-10);
        EXPECT_NEAR(dec.beta_weight, 0.0, 1e-12);
    }
}

// Flipping the phase on half of the blocks breaks the identity exactly there:
// the residual is twice the flipped weight.
TEST(XorStructure, PhaseBrokenControl) {
    auto sk = keygen(tcf::Family::ExactClawFree, 7, 3);
    Rng rng(4);
    auto run = run_prover(ProverStrategy::honest(), sk, 1, RunMode::Coherent, rng);
    auto [broken, weight] = phase_broken(run.state, run.ctx, 0);
    EXPECT_GT(weight, 0.1);
    auto rep = check_xor_structure(broken, run.ctx, 0);
    EXPECT_NEAR(rep.residual, 2 * weight, 1e-10);
    EXPECT_NEAR(rep.residual, 2 * (1 - rep.validity), 1e-10);
    EXPECT_TRUE(rep.bound_holds);
}

TEST(XorStructure, MissingClawIsRejected) {
    auto sk = keygen(tcf::Family::InjectiveTwin, 6, 1);
    Rng rng(2);
    auto run = run_prover(ProverStrategy::honest(), sk, 1, RunMode::Coherent, rng);
    EXPECT_THROW(decompose_state(run.state, run.ctx, 0), DomainError);
}

// A prover that skips k of the L repetitions guesses each skipped equation
// with probability 1/2: validity 2^{-(L - l)} for l answered repetitions.
TEST(NoPreimageBound, ExactValues) {
    auto sk = keygen(tcf::Family::ExactClawFree, 8, 5);
    const unsigned L = 3;
    for (unsigned l = 0; l < L; l++) {
        auto strat = l == 0 ? ProverStrategy::no_query() : ProverStrategy::partial(l);
        int checked = 0;
        for (std::uint64_t t = 0; t < 30; t++) {
            Rng rng = Rng::substream(10 + l, t);
            auto run = run_prover(strat, sk, L, RunMode::Measured, rng);
            auto rep = check_no_preimage_bound(run.state, run.ctx, l);
            if (!distinct_claws(run.ctx)) {
                EXPECT_FALSE(rep.premise_holds);
                continue;
            }
            ASSERT_TRUE(rep.premise_holds) << rep.note;
            EXPECT_NEAR(rep.value, std::ldexp(1.0, static_cast<int>(l) - static_cast<int>(L)), 1e-12);
            EXPECT_TRUE(rep.holds);
            checked++;
        }
        EXPECT_GT(checked, 20);
    }
}

TEST(NoPreimageBound, HonestProverFailsThePremise) {
    auto sk = keygen(tcf::Family::ExactClawFree, 8, 5);
    Rng rng(6);
    auto run = run_prover(ProverStrategy::honest(), sk, 3, RunMode::Measured, rng);
    auto rep = check_no_preimage_bound(run.state, run.ctx, 1);
    EXPECT_FALSE(rep.premise_holds);
    EXPECT_LT(rep.at_most_norm, 1.0);
}

TEST(CleanStructure, DeltaPerStrategy) {
    std::vector<SecretKey> keys;
    for (std::uint64_t k = 0; k < 8; k++) keys.push_back(keygen(tcf::Family::ExactClawFree, 7, 50 + k));
    const std::vector<std::pair<ProverStrategy, double>> cases{{ProverStrategy::honest(), 0.5}, {ProverStrategy::no_query(), 0.0}, {ProverStrategy::mixture(), 0.25}};
    for (const auto &[strat, delta] : cases) {
        auto rep = check_clean_structure(strat, keys, 9);
        EXPECT_NEAR(rep.delta, delta, 1e-9) << strat.name();
        EXPECT_TRUE(rep.passed()) << strat.name();
        EXPECT_EQ(rep.samples, keys.size());
    }
}

TEST(Verifier, ConcreteOracleConsistency) {
    auto sk = keygen(tcf::Family::ExactClawFree, 8, 7);
    unexp::ConcreteOracle h{5};
    Rng rng(8);
    auto e = unexp::unexp_enc(1, sk, unexp::OracleMode::Concrete, h, 3, rng);
    EXPECT_TRUE(verify_consistency(sk, h, e.c, 1));
    EXPECT_FALSE(verify_consistency(sk, h, e.c, 0));
    EXPECT_FALSE(verify_consistency(sk, h, unexp::ParallelCiphertext{}, 1));
}

TEST(Extraction, HonestExplainerYieldsClaws) {
    auto sk = keygen(tcf::Family::ExactClawFree, 8, 1);
    const std::size_t trials = 600;
    auto rep = extract_claw(ProverStrategy::honest(), sk, 2, trials, 77);
    EXPECT_TRUE(rep.consistent());
    EXPECT_EQ(rep.claws_verified, rep.claw_found);
    EXPECT_EQ(rep.claws_match_trapdoor, rep.claw_found);
    double sigma = std::sqrt(0.25 * 0.75 / trials);
    EXPECT_NEAR(rep.claw_rate(), 0.25, 4 * sigma);
    EXPECT_NEAR(rep.accept_rate(), 0.5, 4 * std::sqrt(0.25 / trials));
    // Stage (ii) finds either preimage with equal probability.
    double n = static_cast<double>(rep.found_bit[0] + rep.found_bit[1]);
    ASSERT_GT(n, 0);
    EXPECT_NEAR(rep.found_bit[0] / n, 0.5, 4 * std::sqrt(0.25 / n));
}

TEST(Extraction, GuessingExplainerYieldsNothing) {
    auto sk = keygen(tcf::Family::ExactClawFree, 8, 1);
    const std::size_t trials = 600;
    auto rep = extract_claw(ProverStrategy::no_query(), sk, 2, trials, 78);
    EXPECT_EQ(rep.claw_found, 0u);
    EXPECT_EQ(rep.preimage_found, 0u);
    EXPECT_NEAR(rep.accept_rate(), 0.25, 4 * std::sqrt(0.25 * 0.75 / trials));
}

TEST(Extraction, InjectiveKeysHaveNoClaws) {
    auto sk = keygen(tcf::Family::InjectiveTwin, 8, 1);
    auto rep = extract_claw(ProverStrategy::honest(), sk, 2, 100, 79);
    EXPECT_EQ(rep.claw_found, 0u);
}
