// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fail.
//
//   acceptance [baselines.json] [--only N]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "idsc/verify.hpp"

int main(int argc, char** argv)
{
    std::string path = IDSC_DEFAULT_FIXTURES;
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc)
            only = std::atoi(argv[++i]);
        else
            path = arg;
    }

    idsc::Baselines baselines;
    try {
        baselines = idsc::load_baselines(path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: %s\n", e.what());
        return 2;
    }
    std::printf("baselines %s (version %s)\n", path.c_str(), baselines.version.c_str());

    idsc::VerifyOptions opt;
    int failed = 0;
    double total = 0;
    for (int id = 1; id <= static_cast<int>(idsc::all_suites().size()); ++id) {
        if (only && id != only) continue;
        const auto r = idsc::run_suite(id, baselines, opt);
        total += r.seconds;
        if (!r.ok) ++failed;
        std::printf("%s criterion %d: %s [%.1fs / %.0fs] %s\n", r.ok ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                    r.budget_seconds, r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%s: %d failed, %.1fs total\n", failed ? "FAILED" : "ALL PASSED", failed, total);
    return failed ? 1 : 0;
}
