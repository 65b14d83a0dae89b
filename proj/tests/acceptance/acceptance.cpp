// One line per acceptance criterion; exit status 1 if any criterion fails.

#include <chrono>
#include <cstdio>
#include <string>

#include "torsion_moments/verify.hpp"

using namespace torsion_moments;

int main() {
    int failed = 0;
    for (const auto& suite : suites()) {
        const auto start = std::chrono::steady_clock::now();
        SuiteResult r;
        std::string crash;
        try {
            r = suite.run({});
        } catch (const std::exception& e) {
            r.passed = false;
            crash = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d %-22s %s  (%zu checks, %.1fs)\n", suite.criterion, suite.name,
                    r.passed ? "PASS" : "FAIL", r.checks, secs);
        for (const auto& note : r.notes) std::printf("      %s\n", note.c_str());
        for (const auto& f : r.failures) std::printf("      failed: %s\n", f.c_str());
        if (!crash.empty()) std::printf("      exception: %s\n", crash.c_str());
        if (!r.passed) ++failed;
    }
    std::printf("%d of %zu criteria failed\n", failed, suites().size());
    return failed == 0 ? 0 : 1;
}
