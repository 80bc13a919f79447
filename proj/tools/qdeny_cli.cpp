#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdeny/experiments.hpp"
#include "qdeny/serialize.hpp"

namespace {

using json = nlohmann::json;
using namespace qdeny;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

json read_json(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ParameterError(path + ": " + e.what());
    }
}

void write_json(const std::string &path, const json &j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw ParameterError("cannot write " + path);
    out << j.dump(2) << "\n";
}

/// Accepts either a secret key file or a bare public key file.
PublicKey load_public(const json &j) {
    return j.contains("public") ? io::secret_key_from_json(j).pk : io::public_key_from_json(j);
}

/// Rewrites `run <exp>` and `check-lemma xor|bound|clean` onto the plain subcommands.
std::vector<std::string> normalize_args(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty() && args[0] == "run") {
        args.erase(args.begin());
    } else if (args.size() >= 2 && args[0] == "check-lemma") {
        static const std::map<std::string, std::string> lemma{{"xor", "xor-structure"}, {"bound", "bound-check"}, {"clean", "clean-structure"}};
        auto it = lemma.find(args[1]);
        if (it == lemma.end()) throw CLI::ValidationError("check-lemma", "expected xor, bound or clean");
        args.erase(args.begin());
        args[0] = it->second;
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    return args;
}

struct ExperimentFlags {
    std::string config_path;
    exp::ExperimentConfig cfg;
    std::map<std::string, CLI::Option *> opts;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

void add_experiment_flags(CLI::App *sub, ExperimentFlags &f) {
    sub->add_option("--config", f.config_path, "JSON config; explicit flags override it");
    f.opts["seed"] = sub->add_option("--seed", f.seed, "master seed (required here or in the config)");
    f.opts["trials"] = sub->add_option("--trials", f.trials, "trial count (defaults per experiment)");
    f.opts["family"] = sub->add_option("--family", f.cfg.family, "injective | exact | lattice");
    f.opts["n"] = sub->add_option("--n", f.cfg.n, "preimage bits for toy families");
    f.opts["L"] = sub->add_option("--L", f.cfg.L, "parallel repetitions");
    f.opts["strategy"] = sub->add_option("--strategy", f.cfg.strategy, "honest | noquery | mixture | partial:l");
    f.opts["circuits"] = sub->add_option("--circuits", f.cfg.circuits, "random circuits for oracle-equiv");
    f.opts["mu"] = sub->add_option("--mu", f.cfg.mu, "Hellinger gap threshold");
    f.opts["profile"] = sub->add_option("--profile", f.cfg.profile, "full | fast")->check(CLI::IsMember({"full", "fast"}));
    f.opts["out"] = sub->add_option("--out", f.cfg.out, "report path (stdout if omitted)");
}

exp::ExperimentConfig resolve_config(const std::string &name, const ExperimentFlags &f) {
    exp::ExperimentConfig c;
    if (!f.config_path.empty()) c = exp::ExperimentConfig::from_json(read_json(f.config_path));
    auto set = [&](const char *k) { return f.opts.at(k)->count() > 0; };
    if (set("family")) c.family = f.cfg.family;
    if (set("n")) c.n = f.cfg.n;
    if (set("L")) c.L = f.cfg.L;
    if (set("strategy")) c.strategy = f.cfg.strategy;
    if (set("circuits")) c.circuits = f.cfg.circuits;
    if (set("mu")) c.mu = f.cfg.mu;
    if (set("profile")) c.profile = f.cfg.profile;
    if (set("out")) c.out = f.cfg.out;
    if (set("trials")) c.trials = f.trials;
    if (set("seed")) c.seed = f.seed;
    if (!c.experiment.empty() && c.experiment != name) throw ParameterError("config is for experiment '" + c.experiment + "', not '" + name + "'");
    c.experiment = name;
    c.validate();
    c.seed_value();
    return c;
}

int emit_report(const exp::Report &r, const std::string &out) {
    for (const auto &c : r.criteria) {
        std::cerr << (c.passed ? "PASS" : "FAIL") << " [" << c.id << "] " << c.description << " value=" << c.value << " threshold=" << c.threshold << " ("
                  << c.runtime_seconds << "s)\n";
    }
    write_json(out, r.to_json());
    return r.passed() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qdeny: deniable and unexplainable encryption toolkit"};
    app.require_subcommand(1);

    // keygen
    std::string family = "exact", key_out, pub_out;
    unsigned n = 8;
    std::uint64_t key_seed = 0;
    auto *keygen_cmd = app.add_subcommand("keygen", "generate a key pair");
    keygen_cmd->add_option("--family", family, "injective | exact | lattice");
    keygen_cmd->add_option("--n", n, "preimage bits (toy families)");
    keygen_cmd->add_option("--seed", key_seed, "key seed")->required();
    keygen_cmd->add_option("--out", key_out, "secret key path (stdout if omitted)");
    keygen_cmd->add_option("--public-out", pub_out, "also write the public key here");

    // encrypt
    std::string key_path, scheme = "deniable", ct_out;
    unsigned message = 0, reps = 1;
    std::uint64_t enc_seed = 0, oracle_seed = 0;
    auto *enc_cmd = app.add_subcommand("encrypt", "encrypt one bit");
    enc_cmd->add_option("--key", key_path, "public or secret key file")->required();
    enc_cmd->add_option("--scheme", scheme, "deniable | unexp")->check(CLI::IsMember({"deniable", "unexp"}));
    enc_cmd->add_option("--m", message, "plaintext bit")->required()->check(CLI::Range(0, 1));
    enc_cmd->add_option("--L", reps, "repetitions (unexp)");
    enc_cmd->add_option("--seed", enc_seed, "encryption randomness")->required();
    auto *enc_oracle = enc_cmd->add_option("--oracle-seed", oracle_seed, "seed of the shared hash H (unexp)");
    enc_cmd->add_option("--out", ct_out, "ciphertext path (stdout if omitted)");

    // decrypt
    std::string ct_path;
    auto *dec_cmd = app.add_subcommand("decrypt", "decrypt a ciphertext");
    dec_cmd->add_option("--key", key_path, "secret key file")->required();
    dec_cmd->add_option("--in", ct_path, "ciphertext file")->required();
    auto *dec_oracle = dec_cmd->add_option("--oracle-seed", oracle_seed, "seed of the shared hash H (unexp)");

    const std::vector<std::pair<std::string, std::string>> experiments{
        {"correctness", "decryption correctness"},
        {"equation-identity", "honest ciphertexts satisfy their equations"},
        {"deniability-exp", "trace distance of faked and honest views"},
        {"oracle-equiv", "full vs compressed oracle on random circuits"},
        {"bound-check", "validity of strategies that skip preimages"},
        {"xor-structure", "XOR structure of honest prover states"},
        {"clean-structure", "structure inequalities for several strategies"},
        {"extract-claw", "claw extraction from a successful explainer"},
        {"distances", "distance inequalities on random densities"},
        {"lattice", "lattice NTCF interface clauses"},
        {"suite", "every acceptance criterion"},
    };
    std::map<std::string, ExperimentFlags> flags;
    std::map<std::string, CLI::App *> exp_cmds;
    for (const auto &[name, help] : experiments) {
        exp_cmds[name] = app.add_subcommand(name, help);
        add_experiment_flags(exp_cmds[name], flags[name]);
    }

    try {
        app.parse(normalize_args(argc, argv));
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (keygen_cmd->parsed()) {
            auto sk = keygen(tcf::parse_family(family), n, key_seed);
            write_json(key_out, io::to_json(sk));
            if (!pub_out.empty()) write_json(pub_out, io::to_json(sk.pk));
            return kExitPass;
        }
        if (enc_cmd->parsed()) {
            auto key_json = read_json(key_path);
            auto pk = load_public(key_json);
            // Lattice states can only be written down with the trapdoor; it never shapes the output.
            std::optional<SecretKey> sim;
            if (key_json.contains("public")) sim = io::secret_key_from_json(key_json);
            if (pk.is_lattice() && !sim) throw ParameterError("lattice encryption in the simulator needs the secret key file");
            const SecretKey *sim_ptr = sim ? &*sim : nullptr;
            Rng rng(enc_seed);
            if (scheme == "deniable") {
                auto r = deniable::den_enc(message, pk, sim_ptr, rng, {false, false});
                write_json(ct_out, io::to_json(pk, r.c));
            } else {
                if (enc_oracle->count() == 0) throw ParameterError("unexp encryption needs --oracle-seed");
                auto r = unexp::unexp_enc(message, pk, sim_ptr, unexp::OracleMode::Concrete, exp::concrete_oracle(oracle_seed), reps, rng);
                write_json(ct_out, io::to_json(pk, r.c));
            }
            return kExitPass;
        }
        if (dec_cmd->parsed()) {
            auto sk = io::secret_key_from_json(read_json(key_path));
            auto ct = read_json(ct_path);
            json out;
            if (ct.value("scheme", "deniable") == "unexp") {
                if (dec_oracle->count() == 0) throw ParameterError("unexp decryption needs --oracle-seed");
                auto r = unexp::unexp_dec(io::unexp_from_json(sk.pk, ct), sk, exp::concrete_oracle(oracle_seed));
                out["m"] = r.m ? json(*r.m) : json(nullptr);
                if (!r.m) out["diagnostic"] = r.diagnostic;
            } else {
                auto m = deniable::den_dec(io::deniable_from_json(sk.pk, ct), sk);
                out["m"] = m ? json(*m) : json(nullptr);
                if (!m) out["diagnostic"] = "inversion failed";
            }
            std::cout << out.dump() << "\n";
            return out["m"].is_null() ? kExitFail : kExitPass;
        }
        for (const auto &[name, cmd] : exp_cmds) {
            if (!cmd->parsed()) continue;
            auto cfg = resolve_config(name, flags[name]);
            exp::Report r;
            if (name == "correctness") r = exp::correctness(cfg);
            else if (name == "equation-identity") r = exp::equation_identity(cfg);
            else if (name == "deniability-exp") r = exp::deniability(cfg);
            else if (name == "oracle-equiv") r = exp::oracle_equivalence(cfg);
            else if (name == "bound-check") r = exp::bound_check(cfg);
            else if (name == "xor-structure") r = exp::xor_structure(cfg);
            else if (name == "clean-structure") r = exp::clean_structure(cfg);
            else if (name == "extract-claw") r = exp::extraction(cfg);
            else if (name == "distances") r = exp::distance_toolbox(cfg);
            else if (name == "lattice") r = exp::lattice_clauses(cfg);
            else r = exp::suite(cfg);
            return emit_report(r, cfg.out);
        }
    } catch (const ParameterError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
