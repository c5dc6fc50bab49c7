#include "phsim/cli/sweep.hpp"

#include <cmath>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace phsim::cli {

ConvergenceTable sweep(const MechanicalSystem& sys, const State& x0,
                       const IntegratorParams& params, const std::vector<double>& h_list,
                       const InputSignal& input)
{
    if (h_list.size() < 3)
        throw std::invalid_argument("sweep: at least three step sizes are required");
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        if (!(h_list[i] > 0.0))
            throw std::invalid_argument("sweep: step sizes must be positive");
        if (i > 0 && !(h_list[i] < h_list[i - 1]))
            throw std::invalid_argument("sweep: step sizes must be strictly decreasing");
    }

    ConvergenceTable table;
    table.h_ref = h_list.back() / 100.0;

    auto final_state = [&](double h) {
        IntegratorParams p = params;
        p.h = h;
        try {
            return integrate(sys, x0, p, input).back().stacked();
        } catch (const StepError& e) {
            std::ostringstream os;
            os << "sweep run with h = " << h << ": " << e.what();
            throw StepError(os.str());
        }
    };

    auto reference = std::async(std::launch::async, final_state, table.h_ref);
    std::vector<std::future<Vector>> runs;
    runs.reserve(h_list.size());
    for (double h : h_list)
        runs.push_back(std::async(std::launch::async, final_state, h));

    const Vector x_ref = reference.get();
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        ConvergenceRow row;
        row.h = h_list[i];
        row.error = (runs[i].get() - x_ref).norm();
        if (i > 0) {
            const ConvergenceRow& prev = table.rows.back();
            row.order = std::log(prev.error / row.error) / std::log(prev.h / row.h);
        }
        table.rows.push_back(row);
    }
    return table;
}

void print_convergence_table(std::ostream& os, const ConvergenceTable& table)
{
    const auto flags = os.flags();
    os << "reference h = " << std::scientific << std::setprecision(3) << table.h_ref << '\n'
       << std::setw(12) << "h" << std::setw(16) << "error" << std::setw(10) << "order" << '\n';
    for (const auto& row : table.rows) {
        os << std::setw(12) << std::setprecision(3) << std::scientific << row.h << std::setw(16)
           << std::setprecision(6) << row.error;
        if (row.order)
            os << std::setw(10) << std::fixed << std::setprecision(3) << *row.order;
        else
            os << std::setw(10) << "-";
        os << '\n';
    }
    os.flags(flags);
}

} // namespace phsim::cli
