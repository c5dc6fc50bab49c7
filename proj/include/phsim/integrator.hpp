#pragma once

/**
 * @file integrator.hpp
 * @brief Implicit one-step schemes for the port-Hamiltonian state equations.
 *
 * One step from x0 to x1 solves
 *
 *     E (x1 - x0) = h (J(x_mid) z_mid + B u_mid),   x_mid = (x0 + x1)/2,
 *
 * with E^T z_mid = DG H(x0, x1) for the discrete-gradient scheme, or
 * E^T z_mid = grad H(x_mid) for the implicit midpoint baseline. The
 * collocated output is y_mid = B^T z_mid. Each step is a Newton solve with
 * initial guess x1 = x0.
 */

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "phsim/dgrad.hpp"
#include "phsim/model.hpp"

namespace phsim {

enum class JacobianMode { finite_difference, analytic };
enum class Scheme { discrete_gradient, implicit_midpoint };
enum class InconsistentInitialPolicy { error, warn };

std::string to_string(JacobianMode mode);
std::string to_string(Scheme scheme);

struct IntegratorParams {
    double h = 1e-2;
    double t0 = 0.0;
    double t_end = 1.0;
    double newton_tol = 1e-9;
    int newton_max_iters = 50;
    DGradParams dgrad;
    JacobianMode jacobian_mode = JacobianMode::finite_difference;
    Scheme scheme = Scheme::discrete_gradient;
    /// Allowed |C0 - Ctilde(q0)|_inf at the start of integrate().
    double consistency_tol = 1e-10;
    InconsistentInitialPolicy on_inconsistent = InconsistentInitialPolicy::error;

    /// Checks the run invariants (h > 0, t_end >= t0, tolerances positive).
    void validate() const;
};

struct StepStats {
    int iterations = 0;
    double final_residual_norm = 0.0;
    bool converged = false;
};

/// Non-potential input u(t_mid, x_mid), entering through B. An empty
/// signal is the zero input.
struct InputSignal {
    std::function<Vector(double, const State&)> value;
    /// Optional du/dx_mid with respect to the stacked midpoint state
    /// (n_u x state_size), used by the analytic Jacobian.
    std::function<Matrix(double, const State&)> jacobian;

    bool empty() const noexcept { return !value; }
    Vector evaluate(const MechanicalSystem& sys, double t, const State& x_mid) const;
    Matrix evaluate_jacobian(const MechanicalSystem& sys, double t, const State& x_mid) const;

    static InputSignal zero();
    /// u = -damping * v_mid. Requires an input map with 3N columns.
    static InputSignal viscous(double damping);
};

struct StepResult {
    State state;
    StepStats stats;
    Vector z_mid;
    Vector u_mid;
    Vector y_mid;
    /// h * y_mid . u_mid
    double power_supplied = 0.0;
};

/// Arithmetic mean of two states.
State midpoint(const State& x0, const State& x1);

/// z_mid solving E^T z = DG H(x0, x1) (or grad H(x_mid) for the baseline).
Vector midpoint_efforts(const MechanicalSystem& sys, const State& x0, const State& x1,
                        const IntegratorParams& params);

/// E (x1 - x0) - h [J(x_mid) z_mid + B u_mid]
Vector step_residual(const MechanicalSystem& sys, const State& x0, const State& x1, double h,
                     const Vector& u_mid, const IntegratorParams& params);

/// d(step_residual)/d(x1) with u held as a function of x_mid.
Matrix step_residual_jacobian(const MechanicalSystem& sys, const State& x0, const State& x1,
                              double h, double t_mid, const InputSignal& input,
                              const IntegratorParams& params);

/// One step of the scheme selected in params, starting at (t0, x0) with
/// step size params.h (negative steps integrate backwards).
StepResult solve_step(const MechanicalSystem& sys, const State& x0, double t0,
                      const IntegratorParams& params, const InputSignal& input = {});

/// One implicit-midpoint step regardless of params.scheme.
StepResult implicit_midpoint_step(const MechanicalSystem& sys, const State& x0, double t0,
                                  const IntegratorParams& params, const InputSignal& input = {});

/// y = B^T z
Vector collocated_output(const MechanicalSystem& sys, const Vector& z_mid);

struct StepDiagnostics {
    double t = 0.0;
    double H = 0.0;
    double T_kin = 0.0;
    double V_int = 0.0;
    double V_ext = 0.0;
    Vec3 L = Vec3::Zero();
    double kinematic_residual = 0.0;
    /// Power entering during the step that ended at this state; 0 at n = 0.
    double power_supplied = 0.0;
    StepStats newton;
};

struct Trajectory {
    std::vector<State> states;
    std::vector<StepDiagnostics> diagnostics;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return states.size(); }
    bool empty() const noexcept { return states.empty(); }
    const State& back() const { return states.back(); }
};

/// Time grid t0 + n h, with the last step shortened to end on t_end.
std::vector<double> time_grid(const IntegratorParams& params);

Trajectory integrate(const MechanicalSystem& sys, const State& x0,
                     const IntegratorParams& params, const InputSignal& input = {});

} // namespace phsim
