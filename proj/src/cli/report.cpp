#include "phsim/cli/report.hpp"

#include <iomanip>
#include <ostream>

#include <yaml-cpp/yaml.h>

namespace phsim::cli {

namespace {

const char* verdict(bool pass)
{
    return pass ? "pass" : "FAIL";
}

} // namespace

void write_report(std::ostream& os, const ConservationReport& report, const RunSummary& run)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "scheme" << YAML::Value << run.scheme;
    out << YAML::Key << "steps" << YAML::Value << run.steps;
    out << YAML::Key << "states" << YAML::Value << report.n_states;
    out << YAML::Key << "max_newton_iterations" << YAML::Value << run.max_newton_iterations;
    out << YAML::Key << "momentum_axis" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << report.axis[0] << report.axis[1] << report.axis[2] << YAML::EndSeq;

    out << YAML::Key << "criteria" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "energy_balance" << YAML::Value << YAML::BeginMap
        << YAML::Key << "max_error" << YAML::Value << report.max_energy_balance_error
        << YAML::Key << "tolerance" << YAML::Value << report.tolerances.energy
        << YAML::Key << "pass" << YAML::Value << report.energy_pass << YAML::EndMap;
    out << YAML::Key << "axial_angular_momentum" << YAML::Value << YAML::BeginMap
        << YAML::Key << "max_increment" << YAML::Value << report.max_axial_momentum_increment
        << YAML::Key << "tolerance" << YAML::Value << report.tolerances.angular_momentum
        << YAML::Key << "checked" << YAML::Value << report.tolerances.check_angular_momentum
        << YAML::Key << "pass" << YAML::Value << report.angular_momentum_pass << YAML::EndMap;
    out << YAML::Key << "kinematic_condition" << YAML::Value << YAML::BeginMap
        << YAML::Key << "max_residual" << YAML::Value << report.max_kinematic_residual
        << YAML::Key << "tolerance" << YAML::Value << report.tolerances.kinematic
        << YAML::Key << "pass" << YAML::Value << report.kinematic_pass << YAML::EndMap;
    out << YAML::EndMap;

    out << YAML::Key << "max_energy_increment" << YAML::Value << report.max_energy_increment;
    out << YAML::Key << "max_axial_momentum_drift" << YAML::Value
        << report.max_axial_momentum_drift;
    out << YAML::Key << "max_bookkeeping_mismatch" << YAML::Value
        << report.max_bookkeeping_mismatch;
    out << YAML::Key << "passed" << YAML::Value << report.passed();
    out << YAML::EndMap;
    os << out.c_str() << '\n';
}

void print_summary(std::ostream& os, const ConservationReport& report, const RunSummary& run)
{
    const auto flags = os.flags();
    os << run.scheme << ": " << run.steps << " steps, max Newton iterations "
       << run.max_newton_iterations << '\n'
       << std::scientific << std::setprecision(3)
       << "  energy balance       max |dH - h y.u| = " << report.max_energy_balance_error
       << "  [" << verdict(report.energy_pass) << "]\n";
    if (report.tolerances.check_angular_momentum)
        os << "  angular momentum     max |dL . b|     = " << report.max_axial_momentum_increment
           << "  [" << verdict(report.angular_momentum_pass) << "]\n";
    else
        os << "  angular momentum     not checked (non-zero input)\n";
    os << "  kinematic condition  max |C - C(q)|   = " << report.max_kinematic_residual << "  ["
       << verdict(report.kinematic_pass) << "]\n"
       << "  " << (report.passed() ? "all criteria passed" : "conservation check FAILED") << '\n';
    os.flags(flags);
}

} // namespace phsim::cli
