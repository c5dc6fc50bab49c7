#pragma once

#include <iostream>
#include <string>
#include <vector>

#include "phsim/cli/config.hpp"

namespace phsim::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitConfig = 2,
    kExitNonConvergence = 3,
    kExitReportFailure = 4,
};

struct RunOptions {
    /// `check` skips the trajectory file.
    bool write_trajectory = true;
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;
};

/// Integrates, writes the trajectory and report, prints a summary.
/// Returns one of ExitCode.
int run(const RunConfig& config, const RunOptions& options = {});

/// Returns kExitOk, kExitConfig for a bad step list, or kExitNonConvergence.
int run_sweep(const RunConfig& config, const std::vector<double>& h_list,
              const std::string& table_path, const RunOptions& options = {});

} // namespace phsim::cli
