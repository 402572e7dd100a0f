#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace weakstat {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail; // worst residue or failure description
};

/// Fast invariant suite behind `weakstat check`: algebraic identities,
/// decomposition and reconstruction round trips, and the built-in scenario
/// numbers, evaluated on seeded random instances.
std::vector<CheckResult> run_self_checks(std::uint64_t seed);

} // namespace weakstat
