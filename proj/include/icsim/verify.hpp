#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icsim/quad_core.hpp"

namespace icsim {

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double expected = 0.0;  // bound or reference value
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::string suite;
    std::string title;
    std::vector<CheckResult> checks;
    double seconds = 0.0;

    bool passed() const;
};

// In acceptance order:
// fixed_point, k1_correctness, motivating, bar_star_distance, fixed_convergence,
// lower_bound_floor, gd_floor, chain, oracle, heterogeneity, figure_trends, two_stage,
// bounds_monotonicity.
const std::vector<std::string>& verify_suite_names();

// Throws ConfigError for an unknown suite.
VerifyReport verify(const std::string& suite);

// Random strongly convex instance used by the seeded verification families.
ProblemInstance seeded_instance(std::uint64_t seed, int max_M = 8, int max_d = 10);

}  // namespace icsim
