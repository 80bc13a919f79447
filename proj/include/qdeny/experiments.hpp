#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdeny/common.hpp"
#include "qdeny/compressed_oracle.hpp"
#include "qdeny/deniable.hpp"
#include "qdeny/distances.hpp"
#include "qdeny/family.hpp"
#include "qdeny/lattice_ntcf.hpp"
#include "qdeny/parallel.hpp"
#include "qdeny/qsim.hpp"
#include "qdeny/rigidity.hpp"
#include "qdeny/rng.hpp"
#include "qdeny/serialize.hpp"
#include "qdeny/unexplainable.hpp"

namespace qdeny::exp {

using json = nlohmann::json;

inline constexpr const char *kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

struct Criterion {
    std::string id;
    std::string description;
    bool passed = false;
    double value = 0;
    double threshold = 0;
    double runtime_seconds = 0;
    double runtime_limit = 0;
};

struct Report {
    std::string experiment;
    json config = json::object();
    json metrics = json::object();
    std::vector<Criterion> criteria;
    std::vector<std::string> notes;
    double wall_clock_seconds = 0;

    bool passed() const {
        for (const auto &c : criteria) {
            if (!c.passed) return false;
        }
        return true;
    }

    json to_json() const {
        json crit = json::array();
        for (const auto &c : criteria) {
            crit.push_back({{"id", c.id},
                            {"description", c.description},
                            {"passed", c.passed},
                            {"value", c.value},
                            {"threshold", c.threshold},
                            {"runtime_seconds", c.runtime_seconds},
                            {"runtime_limit_seconds", c.runtime_limit}});
        }
        return {{"schema_version", kSchemaVersion},
                {"tool_version", kToolVersion},
                {"experiment", experiment},
                {"config", config},
                {"metrics", metrics},
                {"criteria", crit},
                {"passed", passed()},
                {"notes", notes},
                {"wall_clock_seconds", wall_clock_seconds}};
    }
};

class Stopwatch {
   public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

   private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Settings shared by every experiment. Unset counts fall back to each
/// experiment's full-profile default, divided by 10 for the fast profile.
struct ExperimentConfig {
    std::string experiment;
    std::string family = "exact";
    unsigned n = 8;
    unsigned L = 2;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::string strategy = "honest";
    std::size_t circuits = 200;
    double mu = 1e-3;
    std::string profile = "full";
    std::string out;

    std::uint64_t seed_value() const {
        if (!seed) throw ParameterError("a seed is required");
        return *seed;
    }
    std::size_t scaled(std::size_t full) const {
        return profile == "fast" ? std::max<std::size_t>(1, full / 10) : full;
    }
    std::size_t trials_or(std::size_t full) const {
        return trials.value_or(scaled(full));
    }

    json to_json() const {
        json j{{"experiment", experiment}, {"family", family}, {"n", n}, {"L", L}, {"strategy", strategy}, {"circuits", circuits}, {"mu", mu}, {"profile", profile}};
        j["seed"] = seed ? json(*seed) : json(nullptr);
        j["trials"] = trials ? json(*trials) : json(nullptr);
        if (!out.empty()) j["out"] = out;
        return j;
    }

    static ExperimentConfig from_json(const json &j) {
        static const std::vector<std::string> known{"experiment", "family", "n", "L", "trials", "seed", "strategy", "circuits", "mu", "profile", "out"};
        if (!j.is_object()) throw ParameterError("config must be a JSON object");
        for (const auto &[k, v] : j.items()) {
            if (std::find(known.begin(), known.end(), k) == known.end()) throw ParameterError("unknown config field '" + k + "'");
        }
        ExperimentConfig c;
        try {
            c.experiment = j.value("experiment", c.experiment);
            c.family = j.value("family", c.family);
            c.n = j.value("n", c.n);
            c.L = j.value("L", c.L);
            if (j.contains("trials") && !j["trials"].is_null()) c.trials = j["trials"].get<std::size_t>();
            if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
            c.strategy = j.value("strategy", c.strategy);
            c.circuits = j.value("circuits", c.circuits);
            c.mu = j.value("mu", c.mu);
            c.profile = j.value("profile", c.profile);
            c.out = j.value("out", c.out);
        } catch (const json::exception &e) {
            throw ParameterError(std::string("bad config value: ") + e.what());
        }
        c.validate();
        return c;
    }

    void validate() const {
        if (profile != "full" && profile != "fast") throw ParameterError("profile must be full or fast");
        tcf::parse_family(family);
        if (L == 0) throw ParameterError("L must be positive");
        if (!(mu > 0)) throw ParameterError("mu must be positive");
    }
};

inline Criterion make_criterion(std::string id, std::string description, bool ok, double value, double threshold, const Stopwatch &sw, double limit) {
    Criterion c{std::move(id), std::move(description), ok, value, threshold, sw.seconds(), limit};
    c.passed = ok && c.runtime_seconds <= limit;
    return c;
}

/// Concrete H fixed by the trapdoor holder; shared by Enc and Dec.
inline unexp::OracleFn concrete_oracle(std::uint64_t seed) {
    return unexp::ConcreteOracle{seed};
}

/// Decrypts a compressed-oracle run by sampling H at both preimages of
/// every image, collapsing the oracle consistently with Enc's queries.
inline unexp::DecResult decrypt_compressed(unexp::EncResult &r, const SecretKey &sk, Rng &rng) {
    std::vector<Word> points;
    for (const auto &y : r.c.y) {
        if (auto c = claw_of(sk, y)) {
            points.push_back(c->x0);
            points.push_back(c->x1);
        }
    }
    auto values = oracle::measure_oracle_values(r.final_state, points, rng);
    return unexp::unexp_dec(r.c, sk, [values](Word x) { return values.at(x); });
}

// ---------------------------------------------------------------- criterion 1

inline Report correctness(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "correctness";
    rep.config = cfg.to_json();
    const auto seed = cfg.seed_value();
    const std::size_t trials = cfg.trials_or(10000);
    // A 0.999 threshold needs the full count even on the fast profile.
    const std::size_t lattice_trials = cfg.trials.value_or(10000);
    const std::size_t compressed_trials = std::max<std::size_t>(1, trials / 20);

    auto rate = [&](std::size_t count, std::uint64_t tag, const std::function<bool(Rng &, std::size_t)> &trial) {
        std::vector<char> ok(count, 0);
        parallel_for(count, [&](std::size_t t) {
            Rng rng = Rng::substream(mix2(seed, tag), t);
            ok[t] = trial(rng, t) ? 1 : 0;
        });
        std::size_t good = 0;
        for (char c : ok) good += c;
        return static_cast<double>(good) / static_cast<double>(count);
    };

    auto exact = keygen(tcf::Family::ExactClawFree, cfg.n, mix2(seed, 1));
    auto lat = keygen(tcf::Family::LatticeNtcf, 0, mix2(seed, 2));
    auto oracle_h = concrete_oracle(mix2(seed, 3));
    bool exact_ok = true, lattice_ok = true;

    auto den = [&](const SecretKey &sk) {
        return [&sk](Rng &rng, std::size_t) {
            unsigned m = rng.bit();
            auto r = deniable::den_enc(m, sk, rng, {false, false});
            auto d = deniable::den_dec(r.c, sk);
            return d && *d == m;
        };
    };
    double r = rate(trials, 10, den(exact));
    rep.metrics["deniable_exact_rate"] = r;
    exact_ok = exact_ok && r == 1.0;
    r = rate(lattice_trials, 11, den(lat));
    rep.metrics["deniable_lattice_rate"] = r;
    lattice_ok = lattice_ok && r >= 0.999;

    double worst_lattice = 1.0;
    for (unsigned L : {1u, 2u, 3u}) {
        auto concrete = [&, L](const SecretKey &sk) {
            return [&, L](Rng &rng, std::size_t) {
                unsigned m = rng.bit();
                auto e = unexp::unexp_enc(m, sk, unexp::OracleMode::Concrete, oracle_h, L, rng);
                auto d = unexp::unexp_dec(e.c, sk, oracle_h);
                return d.m && *d.m == m;
            };
        };
        double re = rate(trials, 20 + L, concrete(exact));
        rep.metrics["unexp_exact_concrete_rate_L" + std::to_string(L)] = re;
        exact_ok = exact_ok && re == 1.0;
        double rc = rate(compressed_trials, 30 + L, [&, L](Rng &rng, std::size_t) {
            unsigned m = rng.bit();
            auto e = unexp::unexp_enc(m, exact, unexp::OracleMode::Compressed, {}, L, rng);
            auto d = decrypt_compressed(e, exact, rng);
            return d.m && *d.m == m;
        });
        rep.metrics["unexp_exact_compressed_rate_L" + std::to_string(L)] = rc;
        exact_ok = exact_ok && rc == 1.0;
        double rl = rate(lattice_trials, 40 + L, concrete(lat));
        rep.metrics["unexp_lattice_concrete_rate_L" + std::to_string(L)] = rl;
        worst_lattice = std::min(worst_lattice, rl);
        lattice_ok = lattice_ok && rl >= 0.999;
    }
    rep.metrics["lattice_worst_rate"] = std::min(worst_lattice, rep.metrics["deniable_lattice_rate"].get<double>());
    rep.notes.push_back("lattice decryption fails only when the image leaves the support of the opposite branch; measured rate is reported");
    rep.criteria.push_back(make_criterion("1", "Dec(Enc(m)) = m: rate 1 for the exact family (n, L in {1,2,3}), >= 0.999 at desk lattice parameters",
                                          exact_ok && lattice_ok, rep.metrics["lattice_worst_rate"].get<double>(), 0.999, sw, 60));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------- criterion 2

inline Report equation_identity(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "equation-identity";
    rep.config = cfg.to_json();
    const auto seed = cfg.seed_value();
    const std::size_t trials = cfg.trials_or(10000);
    const std::size_t compressed_trials = cfg.trials_or(300);
    auto sk = keygen(tcf::Family::ExactClawFree, cfg.n, mix2(seed, 1));

    std::vector<char> holds(trials, 0);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng = Rng::substream(mix2(seed, 50), t);
        unsigned m = rng.bit();
        auto r = deniable::den_enc(m, sk, rng, {false, false});
        auto claw = claw_of(sk, r.c.y);
        holds[t] = claw && (r.c.z ^ m) == parity(r.c.d & (claw->x0 ^ claw->x1));
    });
    std::size_t deniable_holds = 0;
    for (char h : holds) deniable_holds += h;
    rep.metrics["deniable_trials"] = trials;
    rep.metrics["deniable_identity_holds"] = deniable_holds;

    double worst = 0;
    for (unsigned L : {1u, 2u, 3u}) {
        std::vector<double> dev(compressed_trials, 0);
        parallel_for(compressed_trials, [&](std::size_t t) {
            Rng rng = Rng::substream(mix2(seed, 60 + L), t);
            unsigned m = rng.bit();
            auto e = unexp::unexp_enc(m, sk, unexp::OracleMode::Compressed, {}, L, rng);
            dev[t] = std::abs(unexp::validity(e.final_state, unexp::context_for(e.c, sk, m)) - 1.0);
        });
        double w = *std::max_element(dev.begin(), dev.end());
        rep.metrics["unexp_validity_max_deviation_L" + std::to_string(L)] = w;
        worst = std::max(worst, w);
    }
    bool ok = deniable_holds == trials && worst <= 1e-10;
    rep.criteria.push_back(make_criterion("2", "honest ciphertexts satisfy their equations exactly: deniable identity on every trial, unexplainable validity 1 +- 1e-10",
                                          ok, worst, 1e-10, sw, 30));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------- criterion 3

inline Report deniability(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "deniability-exp";
    rep.config = cfg.to_json();
    auto family = tcf::parse_family(cfg.family);
    if (family == tcf::Family::LatticeNtcf) throw ParameterError("deniability experiment needs a toy family");
    const std::size_t trials = cfg.trials_or(100);
    auto r = deniable::deniability_experiment(family, cfg.n, trials, cfg.seed_value(), parallel_runner);
    rep.metrics["family"] = tcf::family_name(family);
    rep.metrics["trace_distance_max"] = r.max_trace_distance;
    rep.metrics["trace_distance_min"] = r.min_trace_distance;
    rep.metrics["trace_distances"] = r.trace_distances;
    if (family == tcf::Family::InjectiveTwin) {
        rep.criteria.push_back(make_criterion("3", "injective keys: residual states for z=0 and z=1 coincide (trace distance <= 1e-10)", r.passed,
                                              r.max_trace_distance, 1e-10, sw, 60));
    } else {
        rep.metrics["supports_partitioned"] = r.supports_partitioned;
        rep.notes.push_back("claw-free keys give perfectly distinguishable residual states; their indistinguishability from injective keys is computational and not tested");
        rep.criteria.push_back(make_criterion("3x", "claw-free keys: conditional states have disjoint supports (trace distance 1)", r.passed, r.min_trace_distance,
                                              1.0, sw, 60));
    }
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------- criterion 4

/// Random oracle circuits on 6 algorithm qubits: X (n), T (1), A (5 − n).
struct CircuitOp {
    enum class Kind { Unitary, Cnot, PhaseQuery, StandardQuery };
    Kind kind = Kind::Unitary;
    unsigned q0 = 0, q1 = 0;
    qsim::Matrix2 u{};
};

struct OracleCircuit {
    unsigned n = 3;
    std::vector<CircuitOp> ops;

    std::size_t queries() const {
        std::size_t q = 0;
        for (const auto &op : ops) q += op.kind == CircuitOp::Kind::PhaseQuery || op.kind == CircuitOp::Kind::StandardQuery;
        return q;
    }
};

inline constexpr unsigned kCircuitQubits = 6;

inline std::pair<std::string, unsigned> circuit_qubit(unsigned n, unsigned q) {
    if (q < n) return {"X", q};
    if (q == n) return {"T", 0};
    return {"A", q - n - 1};
}

inline RegisterLayout circuit_layout(unsigned n) {
    RegisterLayout layout{{"X", n}, {"T", 1}};
    if (kCircuitQubits > n + 1) layout.add("A", kCircuitQubits - n - 1);
    return layout;
}

inline std::vector<std::string> circuit_registers(unsigned n) {
    std::vector<std::string> regs{"X", "T"};
    if (kCircuitQubits > n + 1) regs.push_back("A");
    return regs;
}

inline OracleCircuit random_circuit(unsigned n, unsigned max_queries, Rng &rng) {
    if (n == 0 || n > 4) throw ParameterError("circuit input width must be in [1, 4]");
    OracleCircuit c;
    c.n = n;
    auto layer = [&] {
        for (unsigned q = 0; q < kCircuitQubits; q++) c.ops.push_back({CircuitOp::Kind::Unitary, q, 0, qsim::random_unitary(rng)});
        for (int k = 0; k < 3; k++) {
            unsigned a = static_cast<unsigned>(rng.below(kCircuitQubits));
            unsigned b = static_cast<unsigned>(rng.below(kCircuitQubits - 1));
            if (b >= a) b++;
            c.ops.push_back({CircuitOp::Kind::Cnot, a, b, {}});
        }
    };
    unsigned queries = static_cast<unsigned>(rng.below(max_queries + 1));
    for (unsigned i = 0; i < queries; i++) {
        layer();
        c.ops.push_back({rng.bit() ? CircuitOp::Kind::StandardQuery : CircuitOp::Kind::PhaseQuery, 0, 0, {}});
    }
    layer();
    return c;
}

/// Output distribution of the algorithm registers; the oracle is either the
/// purified truth table (uniform superposition, traced out) or the compressed oracle.
inline distances::Density run_circuit(const OracleCircuit &c, bool compressed) {
    RegisterLayout layout = circuit_layout(c.n);
    if (!compressed) layout.add("H", 1u << c.n);
    SparseState s = SparseState::basis_state(layout);
    if (!compressed) s = qsim::hadamard_all(s, {"H"});
    oracle::CompressedOracle o(c.queries());
    for (const auto &op : c.ops) {
        switch (op.kind) {
            case CircuitOp::Kind::Unitary: {
                auto [reg, bit] = circuit_qubit(c.n, op.q0);
                s = qsim::apply_single_qubit(s, reg, bit, op.u);
                break;
            }
            case CircuitOp::Kind::Cnot: {
                auto [cr, cb] = circuit_qubit(c.n, op.q0);
                auto [tr, tb] = circuit_qubit(c.n, op.q1);
                s = qsim::apply_cnot(s, cr, cb, tr, tb);
                break;
            }
            case CircuitOp::Kind::PhaseQuery:
                s = compressed ? o.phase_query(s, "X", "T") : oracle::full_phase_oracle_query(s, "H", "X", "T");
                break;
            case CircuitOp::Kind::StandardQuery:
                s = compressed ? o.standard_query(s, "X", "T") : oracle::full_standard_oracle_query(s, "H", "X", "T");
                break;
        }
    }
    return distances::marginal(s, circuit_registers(c.n));
}

inline Report oracle_equivalence(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "oracle-equiv";
    rep.config = cfg.to_json();
    const std::size_t circuits = cfg.trials.value_or(cfg.scaled(cfg.circuits));
    std::vector<double> tv(circuits, 0);
    std::vector<std::size_t> queries(circuits, 0);
    parallel_for(circuits, [&](std::size_t i) {
        Rng rng = Rng::substream(mix2(cfg.seed_value(), 70), i);
        auto c = random_circuit(cfg.n, 3, rng);
        queries[i] = c.queries();
        tv[i] = distances::tv_distance(run_circuit(c, false), run_circuit(c, true));
    });
    double worst = circuits ? *std::max_element(tv.begin(), tv.end()) : 0.0;
    rep.metrics["circuits"] = circuits;
    rep.metrics["tv"] = tv;
    rep.metrics["queries"] = queries;
    rep.metrics["tv_max"] = worst;
    rep.criteria.push_back(make_criterion("4", "full and compressed oracle give the same output distribution (TV <= 1e-9 per circuit)", worst <= 1e-9, worst, 1e-9, sw,
                                          120));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------- criterion 5

inline Report bound_check(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "bound-check";
    rep.config = cfg.to_json();
    const auto seed = cfg.seed_value();
    const unsigned L = cfg.experiment == "bound-check" && cfg.L >= 1 ? std::min(cfg.L, unexp::kMaxRepetitionsCompressed) : 3;
    const std::size_t trials = cfg.trials_or(100);
    auto sk = keygen(tcf::Family::ExactClawFree, cfg.n, mix2(seed, 1));
    bool ok = true;
    double worst = 0;
    std::size_t premise_fail = 0, total = 0;
    for (unsigned l = 0; l < L; l++) {
        auto strat = l == 0 ? rigidity::ProverStrategy::no_query() : rigidity::ProverStrategy::partial(l);
        std::vector<rigidity::BoundReport> out(trials);
        parallel_for(trials, [&](std::size_t t) {
            Rng rng = Rng::substream(mix2(seed, 80 + l), t);
            auto run = rigidity::run_prover(strat, sk, L, rigidity::RunMode::Measured, rng);
            out[t] = rigidity::check_no_preimage_bound(run.state, run.ctx, l);
        });
        double expected = std::ldexp(1.0, static_cast<int>(l) - static_cast<int>(L));
        double dev = 0;
        std::size_t fails = 0;
        for (const auto &b : out) {
            if (!b.premise_holds) {
                fails++;
                continue;
            }
            dev = std::max(dev, std::abs(b.value - expected));
            ok = ok && b.holds;
        }
        premise_fail += fails;
        total += trials;
        worst = std::max(worst, dev);
        json m{{"strategy", strat.name()}, {"l", l}, {"expected", expected}, {"max_deviation", dev}, {"premise_failures", fails}};
        rep.metrics["strategies"].push_back(m);
    }
    // Colliding images across repetitions take a run outside the premise; they
    // must stay rare for the check to say anything.
    bool coverage = static_cast<double>(premise_fail) <= 0.1 * static_cast<double>(total);
    rep.metrics["L"] = L;
    rep.metrics["premise_failures"] = premise_fail;
    rep.metrics["max_deviation"] = worst;
    rep.criteria.push_back(make_criterion("5", "validity of guess/partial strategies equals 2^-(L-l) exactly (+-1e-12) and never exceeds the bound", ok && coverage && worst <= 1e-12,
                                          worst, 1e-12, sw, 30));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------- criterion 6

inline Report xor_structure(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "xor-structure";
    rep.config = cfg.to_json();
    const auto seed = cfg.seed_value();
    const std::size_t keys = cfg.trials_or(20);
    double honest_worst = 0, control_worst = 0, control_value = 0, measured_worst = 0;
    bool bound_ok = true;
    for (std::size_t k = 0; k < keys; k++) {
        auto sk = keygen(tcf::Family::ExactClawFree, cfg.n, mix2(seed, 1000 + k));
        Rng rng = Rng::substream(mix2(seed, 90), k);
        auto run = rigidity::run_prover(rigidity::ProverStrategy::honest(), sk, 1, rigidity::RunMode::Coherent, rng);
        auto x = rigidity::check_xor_structure(run.state, run.ctx, 0);
        honest_worst = std::max(honest_worst, x.residual);
        bound_ok = bound_ok && x.bound_holds;
        auto [broken, weight] = rigidity::phase_broken(run.state, run.ctx, 0);
        auto xb = rigidity::check_xor_structure(broken, run.ctx, 0);
        control_worst = std::max(control_worst, std::abs(xb.residual - 2 * weight));
        control_value = xb.residual;
        bound_ok = bound_ok && xb.bound_holds;
        auto meas = rigidity::run_prover(rigidity::ProverStrategy::honest(), sk, 2, rigidity::RunMode::Measured, rng);
        for (std::size_t i = 0; i < 2; i++) {
            if (!meas.ctx.claws[i]) continue;
            measured_worst = std::max(measured_worst, rigidity::check_xor_structure(meas.state, meas.ctx, i).residual);
        }
    }
    rep.metrics["honest_residual_max"] = honest_worst;
    rep.metrics["honest_measured_residual_max"] = measured_worst;
    rep.metrics["control_residual"] = control_value;
    rep.metrics["control_max_deviation"] = control_worst;
    bool ok = honest_worst <= 1e-10 && measured_worst <= 1e-10 && control_worst <= 1e-10 && bound_ok;
    rep.criteria.push_back(make_criterion("6", "honest residual <= 1e-10; phase-broken control residual equals twice its broken weight (1e-10)", ok,
                                          std::max({honest_worst, measured_worst, control_worst}), 1e-10, sw, 30));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------- criterion 7

inline Report clean_structure(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "clean-structure";
    rep.config = cfg.to_json();
    const auto seed = cfg.seed_value();
    const std::size_t count = cfg.trials_or(20);
    std::vector<SecretKey> keys;
    for (std::size_t k = 0; k < count; k++) keys.push_back(keygen(tcf::Family::ExactClawFree, cfg.n, mix2(seed, 2000 + k)));
    const std::vector<std::pair<rigidity::ProverStrategy, double>> cases{
        {rigidity::ProverStrategy::honest(), 0.5}, {rigidity::ProverStrategy::no_query(), 0.0}, {rigidity::ProverStrategy::mixture(), 0.25}};
    bool ok = true;
    double worst = 0;
    for (const auto &[strat, delta] : cases) {
        auto r = rigidity::check_clean_structure(strat, keys, mix2(seed, 95));
        double dev = std::abs(r.delta - delta);
        worst = std::max(worst, dev);
        ok = ok && r.clause_ii && r.clause_iii && r.clause_i && dev <= 1e-9;
        rep.metrics["strategies"].push_back({{"strategy", r.strategy},
                                             {"delta", r.delta},
                                             {"expected_delta", delta},
                                             {"beta_weight", r.beta_weight},
                                             {"single_weight", r.single_weight},
                                             {"mismatch", r.mismatch},
                                             {"clause_i", r.clause_i},
                                             {"clause_ii", r.clause_ii},
                                             {"clause_iii", r.clause_iii}});
    }
    rep.criteria.push_back(make_criterion("7", "honest / guess / mixture satisfy the structure inequalities with delta = 1/2, 0, 1/4 (slack 1e-9)", ok, worst, 1e-9, sw, 30));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------- criterion 8

inline json to_json(const rigidity::ExtractionReport &r) {
    return {{"strategy", r.strategy},       {"n", r.n},
            {"L", r.L},                     {"trials", r.trials},
            {"preimage_found", r.preimage_found}, {"found_bit", r.found_bit},
            {"accepts", r.accepts},         {"claw_found", r.claw_found},
            {"claws_verified", r.claws_verified}, {"claws_match_trapdoor", r.claws_match_trapdoor},
            {"claw_rate", r.claw_rate()},   {"accept_rate", r.accept_rate()}};
}

inline constexpr double kExtractionThreshold = 0.2;

/// With `strategy` empty, runs the honest and guessing provers (criterion 8).
inline Report extraction(const ExperimentConfig &cfg, bool both = false) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "extract-claw";
    rep.config = cfg.to_json();
    const auto seed = cfg.seed_value();
    const std::size_t trials = cfg.trials_or(2000);
    auto family = tcf::parse_family(cfg.family);
    if (family == tcf::Family::LatticeNtcf) throw ParameterError("extraction runs on toy families");
    auto sk = keygen(family, cfg.n, mix2(seed, 1));
    rep.notes.push_back("Verify is the canonical trapdoored verifier; the trapdoor is used to write down prover states and to score claws");
    bool ok = true;
    double value = 0;
    std::vector<rigidity::ProverStrategy> strategies;
    if (both) {
        strategies = {rigidity::ProverStrategy::honest(), rigidity::ProverStrategy::no_query()};
    } else {
        strategies = {rigidity::ProverStrategy::parse(cfg.strategy)};
    }
    for (const auto &strat : strategies) {
        auto r = rigidity::extract_claw(strat, sk, cfg.L, trials, mix2(seed, 100 + static_cast<std::uint64_t>(strat.kind)), parallel_runner);
        rep.metrics[strat.name()] = to_json(r);
        ok = ok && r.consistent();
        if (family == tcf::Family::InjectiveTwin) {
            ok = ok && r.claw_found == 0;
            continue;
        }
        if (strat.kind == rigidity::StrategyKind::Honest) {
            ok = ok && r.claw_rate() >= kExtractionThreshold && r.claws_verified == r.claw_found;
            value = r.claw_rate();
        } else if (strat.kind == rigidity::StrategyKind::NoQueryGuess) {
            double p = std::ldexp(1.0, -static_cast<int>(cfg.L));
            double sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
            rep.metrics[strat.name()]["accept_sigma_distance"] = std::abs(r.accept_rate() - p) / sigma;
            ok = ok && r.claw_found == 0 && std::abs(r.accept_rate() - p) <= 4 * sigma;
        }
    }
    rep.criteria.push_back(make_criterion("8", "honest explain + canonical verify yields claws at rate >= 0.2, all chk-verified; guessing yields none and accepts at 2^-L (4 sigma)",
                                          ok, value, kExtractionThreshold, sw, 120));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------- criterion 9

inline distances::Density random_density(Rng &rng) {
    std::map<std::string, double> w;
    unsigned support = 1 + static_cast<unsigned>(rng.below(12));
    for (unsigned i = 0; i < support; i++) {
        std::string label(1, static_cast<char>('a' + rng.below(16)));
        w[label] += rng.bit() && rng.bit() ? 0.0 : rng.uniform01();
    }
    double total = 0;
    for (auto &[k, v] : w) total += v;
    if (total == 0) w.begin()->second = 1.0;
    return distances::Density::from_weights(w);
}

inline Report distance_toolbox(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "distances";
    rep.config = cfg.to_json();
    const std::size_t pairs = cfg.trials_or(1000);
    double tv_slack = -1, td_slack = -1;
    for (std::size_t i = 0; i < pairs; i++) {
        Rng rng = Rng::substream(mix2(cfg.seed_value(), 110), i);
        auto f1 = random_density(rng), f2 = random_density(rng);
        double h2 = distances::hellinger_sq(f1, f2);
        tv_slack = std::max(tv_slack, distances::tv_distance(f1, f2) - std::sqrt(2 * h2));
        auto [p1, p2] = distances::amplitude_encode(f1, f2);
        td_slack = std::max(td_slack, distances::trace_distance_pure(p1, p2) - distances::superposition_trace_bound(f1, f2));
    }
    rep.metrics["pairs"] = pairs;
    rep.metrics["tv_minus_bound_max"] = tv_slack;
    rep.metrics["trace_minus_bound_max"] = td_slack;
    double worst = std::max(tv_slack, td_slack);
    rep.criteria.push_back(make_criterion("9", "TV <= sqrt(2 H^2) and pure-state trace distance <= superposition bound (slack 1e-12)", worst <= 1e-12, worst, 1e-12, sw, 10));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// --------------------------------------------------------------- criterion 10

inline Report lattice_clauses(const ExperimentConfig &cfg) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "lattice";
    rep.config = cfg.to_json();
    const auto seed = cfg.seed_value();
    const std::size_t trials = cfg.trials_or(10000);
    rep.notes.push_back("desk parameters have no security; they exercise the interface clauses only");

    // Normalization and chk/support agreement on the enumerable set.
    auto tiny_sk = keygen(tcf::Family::LatticeNtcf, 0, mix2(seed, 1), lattice::LatticeParams::tiny());
    const auto &tk = tiny_sk.pk.lat;
    double norm_dev = 0;
    std::size_t support_checks = 0, support_mismatch = 0;
    Rng rng = Rng::substream(mix2(seed, 120), 0);
    for (int t = 0; t < 8; t++) {
        unsigned b = static_cast<unsigned>(t & 1);
        Word x = lattice::sample_preimage(tk.params, rng);
        auto f = lattice::ntcf_eval_density(tk, b, x);
        KahanSum total;
        try {
            auto dens = f.to_density();
            for (const auto &[label, mass] : dens.masses()) total += mass;
        } catch (const DomainError &) {
            total += 2.0;  // failed its own normalization check
        }
        norm_dev = std::max(norm_dev, std::abs(total.value() - 1.0));
        // Every support point, its shifted neighbours, and random images.
        auto center = f.center();
        for (int k = 0; k < 2000; k++) {
            Image y(center.size());
            for (std::size_t i = 0; i < y.size(); i++) {
                auto off = static_cast<std::int64_t>(rng.below(5)) - 2;
                y[i] = lattice::mod_q(center[i] + off, tk.params.q);
            }
            if (k % 4 == 0) y[rng.below(y.size())] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(tk.params.q)));
            support_checks++;
            bool in = f(y) > 0;
            if ((lattice::ntcf_chk(tk, b, x, y) == 1) != in) support_mismatch++;
        }
    }
    auto desk_sk = keygen(tcf::Family::LatticeNtcf, 0, mix2(seed, 2));
    const auto &dk = desk_sk.pk.lat;
    {
        const auto &g = lattice::ntcf_eval_density(dk, 0, 0).coordinate();
        KahanSum z;
        for (auto v = -g.radius(); v <= g.radius(); v++) z += g.pmf(v);
        norm_dev = std::max(norm_dev, std::abs(z.value() - 1.0));
    }

    // Both-preimage inversion on honest images.
    std::vector<char> inverted(trials, 0);
    parallel_for(trials, [&](std::size_t t) {
        Rng r = Rng::substream(mix2(seed, 121), t);
        unsigned b = r.bit();
        Word x = lattice::sample_preimage(dk.params, r);
        auto y = lattice::ntcf_eval_density(dk, b, x).sample(r);
        auto xs = lattice::unpack_preimage(dk.params, x);
        auto ring = lattice::ring_of(dk.params);
        auto other = b == 0 ? ring.sub(xs, desk_sk.lat.s) : ring.add(xs, desk_sk.lat.s);
        auto mine = lattice::ntcf_invert(dk, desk_sk.lat, b, y);
        auto theirs = lattice::ntcf_invert(dk, desk_sk.lat, b ^ 1, y);
        inverted[t] = mine && *mine == x && theirs && *theirs == lattice::pack_preimage(dk.params, other);
    });
    std::size_t inv_ok = 0;
    for (char c : inverted) inv_ok += c;

    // Hellinger gap averaged over keys (it does not depend on x).
    KahanSum gap;
    const std::size_t gap_keys = 10;
    for (std::size_t k = 0; k < gap_keys; k++) {
        auto sk = keygen(tcf::Family::LatticeNtcf, 0, mix2(seed, 3000 + k));
        gap += 0.5 * (lattice::hellinger_gap(sk.pk.lat, sk.lat, 0) + lattice::hellinger_gap(sk.pk.lat, sk.lat, 1));
    }
    double mean_gap = gap.value() / static_cast<double>(gap_keys);

    rep.metrics["normalization_max_deviation"] = norm_dev;
    rep.metrics["support_checks"] = support_checks;
    rep.metrics["support_mismatches"] = support_mismatch;
    rep.metrics["inversion_trials"] = trials;
    rep.metrics["inversion_successes"] = inv_ok;
    rep.metrics["hellinger_gap_mean"] = mean_gap;
    rep.metrics["mu"] = cfg.mu;
    rep.metrics["decode_bound"] = dk.params.decode_bound();
    rep.metrics["trapdoor_constant"] = dk.params.trapdoor_constant();
    rep.metrics["params"] = io::to_json(dk.params);
    bool ok = norm_dev <= 1e-9 && support_mismatch == 0 && inv_ok == trials && mean_gap < cfg.mu;
    rep.criteria.push_back(make_criterion("10", "lattice NTCF: densities normalized (1e-9), chk matches support, both preimages recovered, mean Hellinger gap < mu", ok,
                                          mean_gap, cfg.mu, sw, 120));
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

// ---------------------------------------------------------------------- suite

struct SuiteEntry {
    std::string id;
    std::function<Report(const ExperimentConfig &)> run;
};

inline std::vector<SuiteEntry> acceptance_entries() {
    auto with = [](std::function<void(ExperimentConfig &)> tweak, std::function<Report(const ExperimentConfig &)> fn) {
        return [tweak, fn](const ExperimentConfig &base) {
            ExperimentConfig c = base;
            c.trials.reset();
            c.n = 8;
            tweak(c);
            return fn(c);
        };
    };
    auto none = [](ExperimentConfig &) {};
    return {
        {"1", with(none, correctness)},
        {"2", with(none, equation_identity)},
        {"3", with([](ExperimentConfig &c) { c.family = "injective"; }, deniability)},
        {"4", with([](ExperimentConfig &c) { c.n = 3; }, oracle_equivalence)},
        {"5", with([](ExperimentConfig &c) { c.L = 3; c.experiment = "suite"; }, bound_check)},
        {"6", with(none, xor_structure)},
        {"7", with(none, clean_structure)},
        {"8", with([](ExperimentConfig &c) { c.family = "exact"; c.L = 2; }, [](const ExperimentConfig &c) { return extraction(c, true); })},
        {"9", with(none, distance_toolbox)},
        {"10", with(none, lattice_clauses)},
    };
}

/// Runs every acceptance criterion; `on_criterion` sees each result as it lands.
inline Report suite(const ExperimentConfig &cfg, const std::function<void(const Criterion &)> &on_criterion = {}) {
    Stopwatch sw;
    Report rep;
    rep.experiment = "suite";
    rep.config = cfg.to_json();
    for (const auto &entry : acceptance_entries()) {
        Report r = entry.run(cfg);
        rep.metrics[r.experiment] = r.metrics;
        for (auto &n : r.notes) rep.notes.push_back(n);
        for (auto &c : r.criteria) {
            if (on_criterion) on_criterion(c);
            rep.criteria.push_back(c);
        }
    }
    rep.wall_clock_seconds = sw.seconds();
    return rep;
}

}  // namespace qdeny::exp
