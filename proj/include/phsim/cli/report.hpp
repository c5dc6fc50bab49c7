#pragma once

#include <iosfwd>
#include <string>

#include "phsim/diagnostics.hpp"

namespace phsim::cli {

struct RunSummary {
    std::string scheme;
    std::size_t steps = 0;
    int max_newton_iterations = 0;
};

/// Machine-readable report (YAML).
void write_report(std::ostream& os, const ConservationReport& report, const RunSummary& run);

/// Short human-readable summary.
void print_summary(std::ostream& os, const ConservationReport& report, const RunSummary& run);

} // namespace phsim::cli
