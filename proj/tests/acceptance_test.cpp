// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: acceptance_test [full|fast] [seed] [report.json]

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "qdeny/experiments.hpp"

int main(int argc, char **argv) {
    qdeny::exp::ExperimentConfig cfg;
    cfg.experiment = "suite";
    cfg.profile = argc > 1 ? argv[1] : "full";
    cfg.seed = argc > 2 ? std::stoull(argv[2]) : 20240607ULL;
    try {
        cfg.validate();
        auto report = qdeny::exp::suite(cfg, [](const qdeny::exp::Criterion &c) {
            std::printf("%s criterion %-2s value=%-12.6g threshold=%-10.3g time=%6.2fs/%gs  %s\n", c.passed ? "PASS" : "FAIL", c.id.c_str(), c.value, c.threshold,
                        c.runtime_seconds, c.runtime_limit, c.description.c_str());
            std::fflush(stdout);
        });
        if (argc > 3) std::ofstream(argv[3]) << report.to_json().dump(2) << "\n";
        std::size_t passed = 0;
        for (const auto &c : report.criteria) passed += c.passed;
        std::printf("%zu/%zu criteria passed (profile %s, seed %llu, %.1fs)\n", passed, report.criteria.size(), cfg.profile.c_str(),
                    static_cast<unsigned long long>(*cfg.seed), report.wall_clock_seconds);
        return report.passed() && report.criteria.size() == 10 ? 0 : 1;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
        return 1;
    }
}
