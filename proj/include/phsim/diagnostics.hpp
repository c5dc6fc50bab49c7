#pragma once

#include <string>

#include "phsim/integrator.hpp"
#include "phsim/model.hpp"

namespace phsim {

/// g(q, C) = C - Ctilde(q)
Vector kinematic_residual(const MechanicalSystem& sys, const State& x);

/// Energy split, angular momentum and kinematic residual of one state.
/// Port power and Newton statistics are left at their defaults.
StepDiagnostics measure_state(const MechanicalSystem& sys, double t, const State& x);

struct ReportTolerances {
    double energy = 1e-8;
    double angular_momentum = 1e-8;
    double kinematic = 1e-8;
    /// The axial angular momentum balance only holds without inputs.
    bool check_angular_momentum = true;
};

struct ConservationReport {
    std::size_t n_states = 0;
    /// max_n |H^{n+1} - H^n - h y.u|
    double max_energy_balance_error = 0.0;
    /// max_n |H^{n+1} - H^n|
    double max_energy_increment = 0.0;
    /// max_n |(L^{n+1} - L^n) . b_hat|
    double max_axial_momentum_increment = 0.0;
    /// max_n |(L^n - L^0) . b_hat|
    double max_axial_momentum_drift = 0.0;
    /// max_n |C^n - Ctilde(q^n)|_inf
    double max_kinematic_residual = 0.0;
    /// Largest relative disagreement between recomputed H, L and the
    /// values recorded during integration.
    double max_bookkeeping_mismatch = 0.0;
    Vec3 axis = Vec3::UnitZ();
    ReportTolerances tolerances;

    bool energy_pass = true;
    /// Stays true when tolerances.check_angular_momentum is off.
    bool angular_momentum_pass = true;
    bool kinematic_pass = true;

    bool passed() const noexcept { return energy_pass && angular_momentum_pass && kinematic_pass; }
};

/// Recomputes energies and angular momenta from the stored states and
/// checks the discrete balance laws. Only the component of L along
/// gravity_axis is checked.
ConservationReport analyze(const MechanicalSystem& sys, const Trajectory& trajectory,
                           const Vec3& gravity_axis, const ReportTolerances& tolerances = {});

/// Axis for the angular momentum check: b / |b|, or e_3 without gravity.
Vec3 default_momentum_axis(const MechanicalSystem& sys);

} // namespace phsim
