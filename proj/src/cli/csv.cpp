#include "phsim/cli/csv.hpp"

#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace phsim::cli {

std::vector<std::string> trajectory_columns(const MechanicalSystem& sys)
{
    std::vector<std::string> cols{"t"};
    for (const char* block : {"q", "v"})
        for (std::size_t k = 1; k <= sys.n_points(); ++k)
            for (const char* axis : {"x", "y", "z"})
                cols.push_back(block + std::to_string(k) + axis);
    for (std::size_t i = 1; i <= sys.n_elements(); ++i)
        cols.push_back("C" + std::to_string(i));
    for (const char* name : {"H", "T_kin", "V_int", "V_ext", "L1", "L2", "L3", "g_inf_norm",
                             "newton_iters", "power_supplied"})
        cols.emplace_back(name);
    return cols;
}

void write_trajectory_csv(std::ostream& os, const MechanicalSystem& sys,
                          const Trajectory& trajectory)
{
    if (trajectory.diagnostics.size() != trajectory.states.size())
        throw std::invalid_argument("write_trajectory_csv: trajectory has no per-state diagnostics");
    const auto cols = trajectory_columns(sys);
    for (std::size_t c = 0; c < cols.size(); ++c)
        os << (c ? "," : "") << cols[c];
    os << '\n';

    std::ostringstream row;
    row << std::setprecision(17);
    for (std::size_t n = 0; n < trajectory.size(); ++n) {
        const State& x = trajectory.states[n];
        const StepDiagnostics& d = trajectory.diagnostics[n];
        row.str("");
        row << d.t;
        for (const Vector* block : {&x.q, &x.v, &x.C})
            for (Eigen::Index i = 0; i < block->size(); ++i)
                row << ',' << (*block)[i];
        row << ',' << d.H << ',' << d.T_kin << ',' << d.V_int << ',' << d.V_ext << ',' << d.L[0]
            << ',' << d.L[1] << ',' << d.L[2] << ',' << d.kinematic_residual << ','
            << d.newton.iterations << ',' << d.power_supplied;
        os << row.str() << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& is, const MechanicalSystem& sys)
{
    const auto cols = trajectory_columns(sys);
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("trajectory csv: missing header");
    {
        std::istringstream header(line);
        std::string name;
        std::size_t c = 0;
        while (std::getline(header, name, ',')) {
            if (c >= cols.size() || name != cols[c])
                throw std::runtime_error("trajectory csv: header does not match the system (column " +
                                         std::to_string(c + 1) + ")");
            ++c;
        }
        if (c != cols.size())
            throw std::runtime_error("trajectory csv: header has too few columns");
    }

    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    const auto m = static_cast<Eigen::Index>(sys.n_elements());
    Trajectory traj;
    std::vector<double> values(cols.size());
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const char* p = line.c_str();
        for (std::size_t c = 0; c < cols.size(); ++c) {
            char* end = nullptr;
            values[c] = std::strtod(p, &end);
            const bool last = c + 1 == cols.size();
            if (end == p || (last ? *end != '\0' : *end != ','))
                throw std::runtime_error("trajectory csv: malformed value on line " +
                                         std::to_string(line_no) + ", column " +
                                         std::to_string(c + 1));
            p = last ? end : end + 1;
        }

        State x;
        x.q = Eigen::Map<const Vector>(values.data() + 1, n);
        x.v = Eigen::Map<const Vector>(values.data() + 1 + n, n);
        x.C = Eigen::Map<const Vector>(values.data() + 1 + 2 * n, m);
        const double* tail = values.data() + 1 + 2 * n + m;
        StepDiagnostics d;
        d.t = values[0];
        d.H = tail[0];
        d.T_kin = tail[1];
        d.V_int = tail[2];
        d.V_ext = tail[3];
        d.L = Vec3(tail[4], tail[5], tail[6]);
        d.kinematic_residual = tail[7];
        d.newton.iterations = static_cast<int>(tail[8]);
        d.newton.converged = true;
        d.power_supplied = tail[9];
        traj.states.push_back(std::move(x));
        traj.diagnostics.push_back(d);
    }
    return traj;
}

} // namespace phsim::cli
