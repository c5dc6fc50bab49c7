#include "phsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phsim {

Vector kinematic_residual(const MechanicalSystem& sys, const State& x)
{
    check_state(sys, x);
    return x.C - strain_map(sys, x.q);
}

StepDiagnostics measure_state(const MechanicalSystem& sys, double t, const State& x)
{
    check_state(sys, x);
    StepDiagnostics d;
    d.t = t;
    d.T_kin = kinetic_energy(sys, x.v);
    d.V_int = internal_energy(sys, x.C);
    d.V_ext = external_energy(sys, x.q);
    d.H = d.T_kin + d.V_int + d.V_ext;
    d.L = angular_momentum(sys, x.q, x.v);
    d.kinematic_residual = kinematic_residual(sys, x).lpNorm<Eigen::Infinity>();
    return d;
}

Vec3 default_momentum_axis(const MechanicalSystem& sys)
{
    const Vec3 b = sys.gravity();
    return b.norm() > 0.0 ? Vec3(b.normalized()) : Vec3(Vec3::UnitZ());
}

namespace {

double relative_gap(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace

ConservationReport analyze(const MechanicalSystem& sys, const Trajectory& trajectory,
                           const Vec3& gravity_axis, const ReportTolerances& tolerances)
{
    if (trajectory.empty())
        throw std::invalid_argument("analyze: empty trajectory");
    if (!(gravity_axis.norm() > 0.0))
        throw std::invalid_argument("analyze: gravity axis must be a nonzero vector");
    const bool have_records = trajectory.diagnostics.size() == trajectory.states.size();

    ConservationReport report;
    report.n_states = trajectory.size();
    report.axis = gravity_axis.normalized();
    report.tolerances = tolerances;

    double H_prev = 0.0;
    double axial_prev = 0.0;
    double axial_first = 0.0;
    for (std::size_t n = 0; n < trajectory.size(); ++n) {
        const State& x = trajectory.states[n];
        const double H = hamiltonian(sys, x);
        const Vec3 L = angular_momentum(sys, x.q, x.v);
        const double axial = L.dot(report.axis);
        report.max_kinematic_residual = std::max(
            report.max_kinematic_residual, kinematic_residual(sys, x).lpNorm<Eigen::Infinity>());

        if (have_records) {
            const StepDiagnostics& rec = trajectory.diagnostics[n];
            double gap = relative_gap(H, rec.H);
            for (int c = 0; c < 3; ++c)
                gap = std::max(gap, relative_gap(L[c], rec.L[c]));
            report.max_bookkeeping_mismatch = std::max(report.max_bookkeeping_mismatch, gap);
        }

        if (n == 0) {
            axial_first = axial;
        } else {
            const double power = have_records ? trajectory.diagnostics[n].power_supplied : 0.0;
            const double dH = H - H_prev;
            report.max_energy_increment = std::max(report.max_energy_increment, std::abs(dH));
            report.max_energy_balance_error =
                std::max(report.max_energy_balance_error, std::abs(dH - power));
            report.max_axial_momentum_increment =
                std::max(report.max_axial_momentum_increment, std::abs(axial - axial_prev));
            report.max_axial_momentum_drift =
                std::max(report.max_axial_momentum_drift, std::abs(axial - axial_first));
        }
        H_prev = H;
        axial_prev = axial;
    }

    report.energy_pass = report.max_energy_balance_error <= tolerances.energy;
    report.angular_momentum_pass =
        !tolerances.check_angular_momentum ||
        report.max_axial_momentum_increment <= tolerances.angular_momentum;
    report.kinematic_pass = report.max_kinematic_residual <= tolerances.kinematic;
    return report;
}

} // namespace phsim
