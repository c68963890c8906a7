#pragma once

#include <string>
#include <vector>

namespace sfattack {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
};

/// Runs every end-to-end criterion (figure reproductions, oracle equivalences,
/// identities) at its pinned tolerance. Deterministic.
std::vector<CriterionResult> run_acceptance_suite();

}  // namespace sfattack
