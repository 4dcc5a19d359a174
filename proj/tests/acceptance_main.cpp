// Acceptance driver: runs the verification battery and prints one line per
// criterion. Exit status is the number of failed (non-skipped) criteria.

#include "ere/acceptance.hpp"

#include <cstdio>
#include <cstring>
#include <string>

int main(int argc, char** argv) {
    ere::VerifyLevel level = ere::VerifyLevel::full;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--level") == 0 && i + 1 < argc) {
            level = std::string(argv[i + 1]) == "fast" ? ere::VerifyLevel::fast
                                                       : ere::VerifyLevel::full;
        }
    }
    auto results = ere::run_acceptance(level);
    int failed = 0;
    for (const auto& r : results) {
        const char* status = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
        if (!r.pass && !r.skipped) ++failed;
        std::printf("[%s] C%02d %-58s (%6.2fs) %s\n", status, r.id, r.name.c_str(), r.wall_s,
                    r.detail.c_str());
    }
    std::printf("%d/%zu criteria passed%s\n", static_cast<int>(results.size()) - failed,
                results.size(), failed ? "" : " -- all green");
    return failed;
}
