#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fragtail {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    /// Measured quantities against their pinned tolerances.
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    /// Criteria to run; empty runs all thirteen.
    std::vector<int> only;
};

/// Runs the acceptance criteria in order, printing one line per criterion to `out` as it finishes.
/// A criterion passes only if its numerical test passes within its runtime budget.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream& out);

std::string format_result_line(const CriterionResult& r);

} // namespace fragtail
