#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "phsim/integrator.hpp"

namespace phsim::cli {

struct ConvergenceRow {
    double h = 0.0;
    /// |x_h(t_end) - x_ref(t_end)|_2 over the stacked state.
    double error = 0.0;
    /// log(e_prev / e) / log(h_prev / h); empty for the first row.
    std::optional<double> order;
};

struct ConvergenceTable {
    double h_ref = 0.0;
    std::vector<ConvergenceRow> rows;
};

/// Global error at t_end for each step size against a reference run with
/// h_ref = min(h_list) / 100. Needs at least three strictly decreasing
/// step sizes. Runs execute concurrently.
ConvergenceTable sweep(const MechanicalSystem& sys, const State& x0,
                       const IntegratorParams& params, const std::vector<double>& h_list,
                       const InputSignal& input = {});

void print_convergence_table(std::ostream& os, const ConvergenceTable& table);

} // namespace phsim::cli
