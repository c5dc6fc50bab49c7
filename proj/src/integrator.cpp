#include "phsim/integrator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "phsim/diagnostics.hpp"

namespace phsim {

std::string to_string(JacobianMode mode)
{
    return mode == JacobianMode::analytic ? "analytic" : "finite_difference";
}

std::string to_string(Scheme scheme)
{
    return scheme == Scheme::implicit_midpoint ? "implicit_midpoint" : "discrete_gradient";
}

void IntegratorParams::validate() const
{
    auto fail = [](const std::string& field, const std::string& constraint, double value) {
        std::ostringstream os;
        os << "IntegratorParams." << field << " must be " << constraint << ", got " << value;
        throw std::invalid_argument(os.str());
    };
    if (!std::isfinite(t0))
        fail("t0", "finite", t0);
    if (!std::isfinite(t_end) || t_end < t0)
        fail("t_end", ">= t0", t_end);
    if (!(h > 0.0) || !std::isfinite(h))
        fail("h", "positive", h);
    if (t_end > t0 && h > t_end - t0)
        fail("h", "at most t_end - t0", h);
    if (!(newton_tol > 0.0))
        fail("newton_tol", "positive", newton_tol);
    if (newton_max_iters < 1)
        fail("newton_max_iters", "at least 1", newton_max_iters);
    if (!(consistency_tol >= 0.0))
        fail("consistency_tol", "non-negative", consistency_tol);
    dgrad.validate();
}

// Inputs

Vector InputSignal::evaluate(const MechanicalSystem& sys, double t, const State& x_mid) const
{
    if (!value)
        return Vector::Zero(sys.n_inputs());
    Vector u = value(t, x_mid);
    if (static_cast<std::size_t>(u.size()) != sys.n_inputs()) {
        std::ostringstream os;
        os << "input signal returned " << u.size() << " values, the input map has "
           << sys.n_inputs() << " columns";
        throw DimensionError(os.str());
    }
    return u;
}

Matrix InputSignal::evaluate_jacobian(const MechanicalSystem& sys, double t,
                                      const State& x_mid) const
{
    const auto nu = static_cast<Eigen::Index>(sys.n_inputs());
    const auto d = static_cast<Eigen::Index>(sys.state_size());
    if (!value)
        return Matrix::Zero(nu, d);
    if (jacobian)
        return jacobian(t, x_mid);

    Matrix jac(nu, d);
    const Vector base = evaluate(sys, t, x_mid);
    Vector x = x_mid.stacked();
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (Eigen::Index j = 0; j < d; ++j) {
        const double saved = x[j];
        const double step = eps * (1.0 + std::abs(saved));
        x[j] = saved + step;
        jac.col(j) = (evaluate(sys, t, State::unstack(sys, x)) - base) / step;
        x[j] = saved;
    }
    return jac;
}

InputSignal InputSignal::zero()
{
    return {};
}

InputSignal InputSignal::viscous(double damping)
{
    InputSignal s;
    s.value = [damping](double, const State& x) -> Vector { return -damping * x.v; };
    s.jacobian = [damping](double, const State& x) -> Matrix {
        const auto n = x.v.size();
        Matrix jac = Matrix::Zero(n, 2 * n + x.C.size());
        jac.block(0, n, n, n) = -damping * Matrix::Identity(n, n);
        return jac;
    };
    return s;
}

// Residual

State midpoint(const State& x0, const State& x1)
{
    return {0.5 * (x0.q + x1.q), 0.5 * (x0.v + x1.v), 0.5 * (x0.C + x1.C)};
}

Vector midpoint_efforts(const MechanicalSystem& sys, const State& x0, const State& x1,
                        const IntegratorParams& params)
{
    check_state(sys, x0);
    check_state(sys, x1);
    check_strains(x0.C);
    check_strains(x1.C);
    const State mid = midpoint(x0, x1);
    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    Vector z(sys.state_size());
    if (params.scheme == Scheme::discrete_gradient) {
        z.segment(0, n) = sys.external().discrete_gradient(x0.q, x1.q, params.dgrad);
        z.tail(sys.n_elements()) = internal_energy_dg(sys, x0.C, x1.C, params.dgrad);
    } else {
        z.segment(0, n) = sys.external().gradient(mid.q);
        z.tail(sys.n_elements()) = 0.5 * stress(sys, mid.C);
    }
    // E^T z = (., M v_mid, .) gives the velocity block without a solve.
    z.segment(n, n) = mid.v;
    return z;
}

Vector step_residual(const MechanicalSystem& sys, const State& x0, const State& x1, double h,
                     const Vector& u_mid, const IntegratorParams& params)
{
    if (static_cast<std::size_t>(u_mid.size()) != sys.n_inputs())
        throw DimensionError("step_residual: input has the wrong length");
    const Vector z = midpoint_efforts(sys, x0, x1, params);
    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    const auto m = static_cast<Eigen::Index>(sys.n_elements());
    const Vector q_mid = 0.5 * (x0.q + x1.q);
    const Matrix G = strain_jacobian(sys, q_mid);

    const auto z_q = z.segment(0, n);
    const auto z_v = z.segment(n, n);
    const auto z_C = z.tail(m);

    Vector r(sys.state_size());
    r.segment(0, n) = (x1.q - x0.q) - h * z_v;
    r.segment(n, n) = sys.mass_times(x1.v - x0.v)
                      - h * (-z_q - G.transpose() * z_C + sys.input_map() * u_mid);
    r.tail(m) = (x1.C - x0.C) - h * (G * z_v);
    return r;
}

namespace {

Matrix external_gradient_jacobian(const MechanicalSystem& sys, const Vector& q)
{
    const Eigen::Index n = q.size();
    Matrix jac(n, n);
    const Vector base = sys.external().gradient(q);
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
    Vector probe = q;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double step = eps * (1.0 + std::abs(q[j]));
        probe[j] = q[j] + step;
        jac.col(j) = (sys.external().gradient(probe) - base) / step;
        probe[j] = q[j];
    }
    return jac;
}

} // namespace

Matrix step_residual_jacobian(const MechanicalSystem& sys, const State& x0, const State& x1,
                              double h, double t_mid, const InputSignal& input,
                              const IntegratorParams& params)
{
    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    const auto m = static_cast<Eigen::Index>(sys.n_elements());
    const auto d = static_cast<Eigen::Index>(sys.state_size());
    const State mid = midpoint(x0, x1);
    const Vector z = midpoint_efforts(sys, x0, x1, params);
    const auto z_C = z.tail(m);
    const Matrix G = strain_jacobian(sys, mid.q);

    Matrix K = Matrix::Zero(d, d);

    // Position equations: (q1 - q0) - h v_mid
    K.block(0, 0, n, n).setIdentity();
    K.block(0, n, n, n) = -0.5 * h * Matrix::Identity(n, n);

    // Velocity equations: M (v1 - v0) + h (z_q + G^T z_C - B u)
    Matrix dzq;
    Vector dzC;
    if (params.scheme == Scheme::discrete_gradient) {
        dzq = sys.external().discrete_gradient_jacobian(x0.q, x1.q, params.dgrad);
        dzC = internal_energy_dg_derivative(sys, x0.C, x1.C, params.dgrad);
    } else {
        dzq = 0.5 * external_gradient_jacobian(sys, mid.q);
        dzC.resize(m);
        for (Eigen::Index i = 0; i < m; ++i)
            dzC[i] = 0.5 * element_energy_second_derivative(sys.elements()[i], mid.C[i]);
    }
    K.block(n, 0, n, n) = h * dzq;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& e = sys.elements()[i];
        const double w = z_C[i] / (e.rest_length * e.rest_length);
        for (const auto& [pk, ak] : e.coefficients)
            for (const auto& [pj, aj] : e.coefficients)
                K.block<3, 3>(n + 3 * pk, 3 * pj).diagonal().array() += h * w * ak * aj;
    }
    for (std::size_t k = 0; k < sys.n_points(); ++k)
        K.block<3, 3>(n + 3 * k, n + 3 * k).diagonal().array() += sys.masses()[k];
    K.block(n, 2 * n, n, m) = h * G.transpose() * dzC.asDiagonal();

    if (!input.empty()) {
        const Matrix du = 0.5 * input.evaluate_jacobian(sys, t_mid, mid);
        K.middleRows(n, n) -= h * sys.input_map() * du;
    }

    // Strain equations: (C1 - C0) - h G(q_mid) v_mid
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& e = sys.elements()[i];
        const Vec3 vbar = element_vector(e, mid.v);
        const double scale = h / (e.rest_length * e.rest_length);
        for (const auto& [pj, aj] : e.coefficients)
            K.block<1, 3>(2 * n + i, 3 * pj) -= scale * aj * vbar.transpose();
    }
    K.block(2 * n, n, m, n) = -0.5 * h * G;
    K.block(2 * n, 2 * n, m, m) += Matrix::Identity(m, m);
    return K;
}

Vector collocated_output(const MechanicalSystem& sys, const Vector& z_mid)
{
    if (static_cast<std::size_t>(z_mid.size()) != sys.state_size())
        throw DimensionError("collocated_output: effort vector has the wrong length");
    return sys.input_map().transpose() * z_mid.segment(sys.n_dofs(), sys.n_dofs());
}

// Newton solve

namespace {

void check_iterate(const State& x, int iteration)
{
    for (Eigen::Index i = 0; i < x.C.size(); ++i)
        if (!(x.C[i] > 0.0))
            throw StrainDomainViolation(static_cast<std::size_t>(i), x.C[i], iteration);
}

StepResult newton_step(const MechanicalSystem& sys, const State& x0, double t0,
                       const IntegratorParams& params, const InputSignal& input)
{
    check_state(sys, x0);
    check_strains(x0.C);
    const double h = params.h;
    if (!std::isfinite(h) || h == 0.0)
        throw std::invalid_argument("solve_step: step size must be finite and nonzero");
    if (!(params.newton_tol > 0.0) || params.newton_max_iters < 1)
        throw std::invalid_argument("solve_step: invalid Newton settings");
    params.dgrad.validate();

    const double t_mid = t0 + 0.5 * h;
    const auto residual = [&](const State& x1, int iteration) {
        try {
            const Vector u = input.evaluate(sys, t_mid, midpoint(x0, x1));
            return step_residual(sys, x0, x1, h, u, params);
        } catch (const StrainDomainError& e) {
            throw StrainDomainViolation(e.element(), e.value(), iteration);
        }
    };

    State x1 = x0;
    StepStats stats;
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (int iter = 0;; ++iter) {
        const Vector r = residual(x1, iter);
        const double norm = r.norm();
        stats.iterations = iter;
        stats.final_residual_norm = norm;
        if (norm <= params.newton_tol) {
            stats.converged = true;
            break;
        }
        if (iter == params.newton_max_iters || !std::isfinite(norm))
            throw NonConvergenceError(iter, norm);

        Matrix K;
        if (params.jacobian_mode == JacobianMode::analytic) {
            try {
                K = step_residual_jacobian(sys, x0, x1, h, t_mid, input, params);
            } catch (const StrainDomainError& e) {
                throw StrainDomainViolation(e.element(), e.value(), iter);
            }
        } else {
            Vector x = x1.stacked();
            K.resize(x.size(), x.size());
            for (Eigen::Index j = 0; j < x.size(); ++j) {
                const double saved = x[j];
                const double step = eps * (1.0 + std::abs(saved));
                x[j] = saved + step;
                K.col(j) = (residual(State::unstack(sys, x), iter) - r) / step;
                x[j] = saved;
            }
        }

        const Vector dx = K.partialPivLu().solve(r);
        if (!dx.allFinite())
            throw NonConvergenceError(iter, norm);
        x1 = State::unstack(sys, x1.stacked() - dx);
        check_iterate(x1, iter + 1);
    }

    StepResult out;
    out.state = std::move(x1);
    out.stats = stats;
    out.z_mid = midpoint_efforts(sys, x0, out.state, params);
    out.u_mid = input.evaluate(sys, t_mid, midpoint(x0, out.state));
    out.y_mid = collocated_output(sys, out.z_mid);
    out.power_supplied = h * out.y_mid.dot(out.u_mid);
    return out;
}

} // namespace

StepResult solve_step(const MechanicalSystem& sys, const State& x0, double t0,
                      const IntegratorParams& params, const InputSignal& input)
{
    return newton_step(sys, x0, t0, params, input);
}

StepResult implicit_midpoint_step(const MechanicalSystem& sys, const State& x0, double t0,
                                  const IntegratorParams& params, const InputSignal& input)
{
    IntegratorParams p = params;
    p.scheme = Scheme::implicit_midpoint;
    return newton_step(sys, x0, t0, p, input);
}

// Trajectories

std::vector<double> time_grid(const IntegratorParams& params)
{
    params.validate();
    std::vector<double> grid{params.t0};
    const double span = params.t_end - params.t0;
    if (span == 0.0)
        return grid;
    // Ratios within roundoff of an integer do not get an extra sliver step.
    const auto steps = static_cast<std::size_t>(
        std::max(1.0, std::ceil(span / params.h * (1.0 - 1e-12))));
    grid.reserve(steps + 1);
    for (std::size_t n = 1; n < steps; ++n)
        grid.push_back(params.t0 + static_cast<double>(n) * params.h);
    grid.push_back(params.t_end);
    return grid;
}

Trajectory integrate(const MechanicalSystem& sys, const State& x0,
                     const IntegratorParams& params, const InputSignal& input)
{
    params.validate();
    check_state(sys, x0);
    check_strains(x0.C);

    Trajectory traj;
    const double inconsistency = kinematic_residual(sys, x0).lpNorm<Eigen::Infinity>();
    if (inconsistency > params.consistency_tol) {
        std::ostringstream os;
        os << "initial strains are inconsistent with the initial positions: |C0 - Ctilde(q0)|_inf = "
           << inconsistency << " exceeds " << params.consistency_tol;
        if (params.on_inconsistent == InconsistentInitialPolicy::error)
            throw std::invalid_argument(os.str());
        traj.warnings.push_back(os.str());
    }

    const std::vector<double> grid = time_grid(params);
    traj.states.reserve(grid.size());
    traj.diagnostics.reserve(grid.size());
    traj.states.push_back(x0);
    traj.diagnostics.push_back(measure_state(sys, grid.front(), x0));
    traj.diagnostics.back().newton.converged = true;

    IntegratorParams step_params = params;
    for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
        step_params.h = grid[n + 1] - grid[n];
        StepResult step;
        try {
            step = solve_step(sys, traj.states.back(), grid[n], step_params, input);
        } catch (StepError& e) {
            e.set_step_index(n);
            throw;
        }
        StepDiagnostics diag = measure_state(sys, grid[n + 1], step.state);
        diag.power_supplied = step.power_supplied;
        diag.newton = step.stats;
        traj.states.push_back(std::move(step.state));
        traj.diagnostics.push_back(diag);
    }
    return traj;
}

} // namespace phsim
