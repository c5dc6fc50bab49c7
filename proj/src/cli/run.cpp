#include "phsim/cli/run.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>

#include "phsim/cli/csv.hpp"
#include "phsim/cli/report.hpp"
#include "phsim/cli/sweep.hpp"

namespace phsim::cli {

int run(const RunConfig& config, const RunOptions& options)
{
    std::ostream& out = *options.out;
    std::ostream& err = *options.err;

    Trajectory traj;
    try {
        traj = integrate(config.system, config.initial, config.integrator, config.input.signal());
    } catch (const StepError& e) {
        err << "phsim: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const std::invalid_argument& e) {
        err << "phsim: " << e.what() << '\n';
        return kExitConfig;
    }
    for (const auto& w : traj.warnings)
        err << "phsim: warning: " << w << '\n';

    if (options.write_trajectory && !config.output.trajectory.empty()) {
        std::ofstream file(config.output.trajectory);
        if (!file) {
            err << "phsim: cannot write '" << config.output.trajectory << "'\n";
            return kExitIo;
        }
        write_trajectory_csv(file, config.system, traj);
    }

    const ConservationReport report = analyze(config.system, traj,
                                              default_momentum_axis(config.system),
                                              config.tolerances);
    RunSummary summary;
    summary.scheme = to_string(config.integrator.scheme);
    summary.steps = traj.size() - 1;
    for (const auto& d : traj.diagnostics)
        summary.max_newton_iterations = std::max(summary.max_newton_iterations, d.newton.iterations);

    if (!config.output.report.empty()) {
        std::ofstream file(config.output.report);
        if (!file) {
            err << "phsim: cannot write '" << config.output.report << "'\n";
            return kExitIo;
        }
        write_report(file, report, summary);
    }
    print_summary(out, report, summary);
    return report.passed() ? kExitOk : kExitReportFailure;
}

int run_sweep(const RunConfig& config, const std::vector<double>& h_list,
              const std::string& table_path, const RunOptions& options)
{
    std::ostream& out = *options.out;
    std::ostream& err = *options.err;

    ConvergenceTable table;
    try {
        table = sweep(config.system, config.initial, config.integrator, h_list,
                      config.input.signal());
    } catch (const StepError& e) {
        err << "phsim: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const std::invalid_argument& e) {
        err << "phsim: " << e.what() << '\n';
        return kExitConfig;
    }

    if (!table_path.empty()) {
        std::ofstream file(table_path);
        if (!file) {
            err << "phsim: cannot write '" << table_path << "'\n";
            return kExitIo;
        }
        file << std::setprecision(17) << "h,error,order\n";
        for (const auto& row : table.rows) {
            file << row.h << ',' << row.error << ',';
            if (row.order)
                file << *row.order;
            file << '\n';
        }
    }
    print_convergence_table(out, table);
    return kExitOk;
}

} // namespace phsim::cli
