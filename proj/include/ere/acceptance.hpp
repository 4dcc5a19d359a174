#pragma once

#include <string>
#include <vector>

namespace ere {

enum class VerifyLevel { fast, full };

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string detail;
    double wall_s = 0;
};

// Runs the built-in verification battery. `fast` skips the e >= 0.999 and
// long-horizon (T >= 500) cases inside each criterion.
std::vector<CriterionResult> run_acceptance(VerifyLevel level, int jobs = 1);

} // namespace ere
