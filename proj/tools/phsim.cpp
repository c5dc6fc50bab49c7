// phsim: simulate discrete hyperelastic systems with an energy-conserving
// discrete-gradient scheme.
//
//   phsim simulate configs/pendulum.cfg -o traj.csv --report report.yaml
//   phsim check configs/pendulum.cfg --scheme implicit_midpoint
//   phsim sweep configs/pendulum.cfg --h-list 4e-3,2e-3,1e-3 --t-end 0.1

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phsim/cli/config.hpp"
#include "phsim/cli/run.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<double> h;
    std::optional<double> t_end;
    std::optional<std::string> scheme;
    std::optional<double> newton_tol;
    std::optional<std::string> report;
};

void add_common(CLI::App* cmd, CommonOptions& opts)
{
    // "-h" would clash with the step-size override.
    cmd->set_help_flag("--help", "Print this help message and exit");
    cmd->add_option("config", opts.config_path, "Run configuration file")->required();
    cmd->add_option("--h", opts.h, "Override the step size [s]");
    cmd->add_option("--t-end", opts.t_end, "Override the final time [s]");
    cmd->add_option("--scheme", opts.scheme, "discrete_gradient or implicit_midpoint");
    cmd->add_option("--newton-tol", opts.newton_tol, "Override the Newton residual tolerance");
}

phsim::cli::RunConfig load(const CommonOptions& opts, std::optional<std::string> trajectory)
{
    using namespace phsim::cli;
    RunConfig config = load_config(opts.config_path);
    Overrides o;
    o.h = opts.h;
    o.t_end = opts.t_end;
    o.newton_tol = opts.newton_tol;
    o.trajectory_path = std::move(trajectory);
    o.report_path = opts.report;
    if (opts.scheme) {
        try {
            o.scheme = parse_scheme(*opts.scheme);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(ConfigError::Kind::semantic, "--scheme", std::nullopt, e.what());
        }
    }
    apply_overrides(config, o);
    return config;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace phsim::cli;

    CLI::App app{"Structure-preserving simulation of discrete nonlinear elastodynamics"};
    app.require_subcommand(1);

    CommonOptions sim_opts;
    std::optional<std::string> trajectory_path;
    auto* simulate = app.add_subcommand("simulate", "Integrate, write the trajectory CSV and report");
    add_common(simulate, sim_opts);
    simulate->add_option("-o,--output", trajectory_path, "Trajectory CSV path");
    simulate->add_option("--report", sim_opts.report, "Conservation report path (YAML)");

    CommonOptions check_opts;
    auto* check = app.add_subcommand("check", "Integrate and report conservation only");
    add_common(check, check_opts);
    check->add_option("--report", check_opts.report, "Conservation report path (YAML)");

    CommonOptions sweep_opts;
    std::vector<double> h_list;
    std::string table_path;
    auto* sweep = app.add_subcommand("sweep", "Convergence study over step sizes");
    add_common(sweep, sweep_opts);
    sweep->add_option("--h-list", h_list, "Strictly decreasing step sizes, comma separated")
        ->required()
        ->delimiter(',');
    sweep->add_option("--table", table_path, "Write the convergence table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string& config_path = *simulate ? sim_opts.config_path
                                   : *check    ? check_opts.config_path
                                               : sweep_opts.config_path;
    try {
        if (*simulate) {
            const RunConfig config = load(sim_opts, trajectory_path);
            return run(config);
        }
        if (*check) {
            const RunConfig config = load(check_opts, std::nullopt);
            RunOptions options;
            options.write_trajectory = false;
            return run(config, options);
        }
        const RunConfig config = load(sweep_opts, std::nullopt);
        return run_sweep(config, h_list, table_path);
    } catch (const ConfigError& e) {
        std::cerr << "phsim: " << config_path << ": " << e.what() << '\n';
        return e.kind() == ConfigError::Kind::io ? kExitIo : kExitConfig;
    }
}
