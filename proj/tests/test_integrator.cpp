#include <doctest.h>

#include <cmath>

#include "phsim/diagnostics.hpp"
#include "phsim/integrator.hpp"
#include "test_support.hpp"

using namespace phsim;
using namespace phsim::testing;

namespace {

double max_energy_increment(const MechanicalSystem& sys, const Trajectory& traj)
{
    double worst = 0.0;
    for (std::size_t n = 1; n < traj.size(); ++n)
        worst = std::max(worst, std::abs(hamiltonian(sys, traj.states[n]) - hamiltonian(sys, traj.states[n - 1])));
    return worst;
}

} // namespace

TEST_CASE("step_residual")
{
    const auto sys = pendulum();
    const State x0 = pendulum_initial_state();
    const IntegratorParams params = pendulum_params();
    const Vector u = Vector::Zero(3);

    SUBCASE("position block at x1 = x0 is -h v0")
    {
        const Vector r = step_residual(sys, x0, x0, params.h, u, params);
        CHECK(r[0] == 0.0);
        CHECK(r[1] == doctest::Approx(-0.01).epsilon(1e-15));
        CHECK(r[2] == doctest::Approx(-0.01).epsilon(1e-15));
    }

    SUBCASE("rest state without forces is a fixed point")
    {
        const MechanicalSystem free({1.0}, {ElasticElement::anchored(0, 1e4, 1.0)}, Vec3::Zero());
        State rest;
        rest.q = (Vector(3) << 0.0, 1.0, 0.0).finished();
        rest.v = Vector::Zero(3);
        rest.C = Vector::Constant(1, 1.0);
        CHECK(step_residual(free, rest, rest, params.h, u, params).norm() == 0.0);
    }

    SUBCASE("time reversal flips the sign")
    {
        RandomTriangle gen(5);
        const auto tri = gen.system();
        const Vector u9 = Vector::Zero(9);
        for (int i = 0; i < 20; ++i) {
            const State a = gen.state(tri);
            const State b = gen.state(tri);
            const Vector fwd = step_residual(tri, a, b, 0.01, u9, params);
            const Vector bwd = step_residual(tri, b, a, -0.01, u9, params);
            CHECK((fwd + bwd).norm() <= 1e-12 * (1.0 + fwd.norm()));
        }
    }

    SUBCASE("analytic Jacobian matches central differences")
    {
        RandomTriangle gen(7);
        const auto tri = gen.system();
        const InputSignal damping = InputSignal::viscous(0.3);
        for (int i = 0; i < 10; ++i) {
            const State a = gen.consistent_state(tri);
            State b = a;
            b.q += 0.01 * Vector::Random(9);
            b.v += 0.05 * Vector::Random(9);
            b.C = strain_map(tri, b.q);
            const Matrix jac = step_residual_jacobian(tri, a, b, 0.01, 0.005, damping, params);
            const Matrix fd = central_difference_jacobian(
                [&](const Vector& x1) {
                    const State s = State::unstack(tri, x1);
                    const Vector um = damping.evaluate(tri, 0.005, midpoint(a, s));
                    return step_residual(tri, a, s, 0.01, um, params);
                },
                b.stacked());
            CHECK(max_abs(jac - fd) <= 1e-6 * std::max(1.0, max_abs(fd)));
        }
    }
}

TEST_CASE("solve_step")
{
    const auto sys = pendulum();
    const State x0 = pendulum_initial_state();
    IntegratorParams params = pendulum_params();

    SUBCASE("first benchmark step agrees with a fixed-point oracle")
    {
        params.newton_tol = 1e-12;
        const StepResult res = solve_step(sys, x0, 0.0, params);
        CHECK(res.stats.converged);
        CHECK(res.stats.iterations <= 10);
        const State ref = picard_step(sys, x0, params);
        CHECK((res.state.stacked() - ref.stacked()).norm() <= 1e-8);
    }

    SUBCASE("hanging equilibrium stays put")
    {
        const State eq = hanging_equilibrium_state(1.0, 1e4, 1.0);
        const StepResult res = solve_step(sys, eq, 0.0, params);
        CHECK((res.state.stacked() - eq.stacked()).lpNorm<Eigen::Infinity>() <= 1e-9);
    }

    SUBCASE("finite-difference and analytic Jacobians give the same step")
    {
        RandomTriangle gen(11);
        for (int i = 0; i < 10; ++i) {
            const auto tri = gen.system();
            State a = gen.consistent_state(tri);
            a.v *= 0.2;
            IntegratorParams p = params;
            p.h = 1e-3;
            p.newton_tol = 1e-11;
            p.jacobian_mode = JacobianMode::finite_difference;
            const State fd = solve_step(tri, a, 0.0, p).state;
            p.jacobian_mode = JacobianMode::analytic;
            const State an = solve_step(tri, a, 0.0, p).state;
            CHECK((fd.stacked() - an.stacked()).lpNorm<Eigen::Infinity>() <= 1e-8);
        }
    }

    SUBCASE("non-convergence is reported")
    {
        params.newton_max_iters = 1;
        params.newton_tol = 1e-13;
        try {
            solve_step(sys, x0, 0.0, params);
            FAIL("expected NonConvergenceError");
        } catch (const NonConvergenceError& e) {
            CHECK(e.iterations() == 1);
            CHECK(e.residual_norm() > 1e-13);
        }
    }

    SUBCASE("strain leaving its domain is reported")
    {
        State x;
        x.q = (Vector(3) << 0.1, 0.0, 0.0).finished();
        x.v = (Vector(3) << -100.0, 0.0, 0.0).finished();
        x.C = Vector::Constant(1, 0.01);
        params.h = 0.1;
        CHECK_THROWS_AS(solve_step(sys, x, 0.0, params), StrainDomainViolation);
    }

    SUBCASE("zero step size is rejected")
    {
        params.h = 0.0;
        CHECK_THROWS_AS(solve_step(sys, x0, 0.0, params), std::invalid_argument);
    }
}

TEST_CASE("collocated_output")
{
    const auto sys = pendulum();
    const State x0 = pendulum_initial_state();
    const IntegratorParams params = pendulum_params();

    SUBCASE("identity input map gives y = v_mid")
    {
        const StepResult res = solve_step(sys, x0, 0.0, params, InputSignal::viscous(0.5));
        const Vector v_mid = 0.5 * (x0.v + res.state.v);
        CHECK((res.y_mid - v_mid).norm() <= 1e-14);
        CHECK(res.power_supplied <= 0.0);
        CHECK(res.power_supplied == doctest::Approx(params.h * res.y_mid.dot(res.u_mid)));
    }

    SUBCASE("no input channels give an empty output")
    {
        const MechanicalSystem closed({1.0}, {ElasticElement::anchored(0, 1e4, 1.0)},
                                      Vec3(0, 0, -kGravity), Matrix::Zero(3, 0));
        const StepResult res = solve_step(closed, x0, 0.0, params);
        CHECK(res.y_mid.size() == 0);
        CHECK(res.power_supplied == 0.0);
    }

    CHECK_THROWS_AS(collocated_output(sys, Vector::Zero(2)), DimensionError);
}

TEST_CASE("time_grid")
{
    IntegratorParams p;
    p.h = 0.3;
    p.t0 = 1.0;
    p.t_end = 2.0;
    const auto grid = time_grid(p);
    REQUIRE(grid.size() == 5);
    CHECK(grid.front() == 1.0);
    CHECK(grid.back() == 2.0);
    CHECK(grid[3] == doctest::Approx(1.9));

    p.h = 0.01;
    p.t0 = 0.0;
    p.t_end = 4.0;
    CHECK(time_grid(p).size() == 401);

    p.t_end = 0.0;
    CHECK(time_grid(p).size() == 1);
}

TEST_CASE("integrate")
{
    const auto sys = pendulum();
    const State x0 = pendulum_initial_state();
    const IntegratorParams params = pendulum_params();

    SUBCASE("benchmark run conserves energy and axial angular momentum")
    {
        const Trajectory traj = integrate(sys, x0, params);
        REQUIRE(traj.size() == 401);
        REQUIRE(traj.diagnostics.size() == 401);
        CHECK(max_energy_increment(sys, traj) <= 1e-9);
        for (const auto& s : traj.states)
            CHECK(std::abs(angular_momentum(sys, s.q, s.v)[2] - 1.1) <= 1e-9);
        CHECK(traj.diagnostics.back().t == 4.0);
        CHECK(traj.warnings.empty());
    }

    SUBCASE("empty interval returns the initial state")
    {
        IntegratorParams p = params;
        p.t_end = p.t0;
        const Trajectory traj = integrate(sys, x0, p);
        REQUIRE(traj.size() == 1);
        CHECK(traj.states[0].stacked() == x0.stacked());
    }

    SUBCASE("stepping forward and back returns to the start")
    {
        IntegratorParams p = params;
        p.newton_tol = 1e-12;
        p.t_end = 0.5;
        const State end = integrate(sys, x0, p).back();
        p.h = -p.h;
        State back = end;
        for (int n = 0; n < 50; ++n)
            back = solve_step(sys, back, 0.0, p).state;
        CHECK((back.stacked() - x0.stacked()).lpNorm<Eigen::Infinity>() <= 1e-8);
    }

    SUBCASE("inconsistent initial strain")
    {
        State bad = x0;
        bad.C[0] = 1.3;
        CHECK_THROWS_AS(integrate(sys, bad, params), std::invalid_argument);

        IntegratorParams p = params;
        p.t_end = 0.1;
        p.on_inconsistent = InconsistentInitialPolicy::warn;
        const Trajectory traj = integrate(sys, bad, p);
        CHECK(traj.warnings.size() == 1);
        CHECK(traj.size() == 11);
    }

    SUBCASE("step failures carry the step index")
    {
        IntegratorParams p = params;
        p.newton_max_iters = 1;
        p.newton_tol = 1e-13;
        try {
            integrate(sys, x0, p);
            FAIL("expected NonConvergenceError");
        } catch (const NonConvergenceError& e) {
            REQUIRE(e.step_index().has_value());
            CHECK(*e.step_index() == 0);
            CHECK(std::string(e.what()).rfind("step 0:", 0) == 0);
        }
    }
}

TEST_CASE("implicit midpoint baseline")
{
    const IntegratorParams params = pendulum_params();

    SUBCASE("coincides with the discrete gradient scheme for quadratic energies")
    {
        // No elements: H is quadratic in v and linear in q.
        const MechanicalSystem ballistic({1.0, 2.0}, {}, Vec3(0, 0, -kGravity));
        State x;
        x.q = (Vector(6) << 0, 0, 1, 1, 0, 0).finished();
        x.v = (Vector(6) << 1, 0, 2, 0, -1, 0).finished();
        x.C = Vector(0);
        IntegratorParams p = params;
        p.t_end = 0.5;
        const Trajectory dg = integrate(ballistic, x, p);
        p.scheme = Scheme::implicit_midpoint;
        const Trajectory mp = integrate(ballistic, x, p);
        REQUIRE(dg.size() == mp.size());
        for (std::size_t n = 0; n < dg.size(); ++n)
            CHECK((dg.states[n].stacked() - mp.states[n].stacked()).norm() <= 1e-12);
    }

    SUBCASE("drifts in energy on the benchmark")
    {
        const auto sys = pendulum();
        const State x0 = pendulum_initial_state();
        IntegratorParams p = params;
        const double dg = max_energy_increment(sys, integrate(sys, x0, p));
        p.scheme = Scheme::implicit_midpoint;
        const double mp = max_energy_increment(sys, integrate(sys, x0, p));
        CHECK(mp >= 100.0 * dg);
        CHECK(mp > 1e-3);
    }
}

TEST_CASE("balance laws on random triangles")
{
    RandomTriangle gen(41);
    IntegratorParams p;
    p.h = 2e-3;
    p.t_end = 0.1;
    p.newton_tol = 1e-10;
    p.jacobian_mode = JacobianMode::analytic;

    for (int trial = 0; trial < 5; ++trial) {
        const auto tri = gen.system();
        State x0 = gen.consistent_state(tri);
        x0.v *= 0.3;
        for (double damping : {0.0, 0.7}) {
            const InputSignal input = damping > 0.0 ? InputSignal::viscous(damping) : InputSignal{};
            const Trajectory traj = integrate(tri, x0, p, input);
            double H_prev = hamiltonian(tri, traj.states[0]);
            double Lz_prev = angular_momentum(tri, traj.states[0].q, traj.states[0].v)[2];
            for (std::size_t n = 1; n < traj.size(); ++n) {
                const State& s = traj.states[n];
                const double H = hamiltonian(tri, s);
                const double supplied = traj.diagnostics[n].power_supplied;
                CHECK(std::abs(H - H_prev - supplied) <= 10.0 * p.newton_tol * (1.0 + std::abs(H)));
                CHECK(supplied <= 0.0);
                CHECK(kinematic_residual(tri, s).lpNorm<Eigen::Infinity>() <= 10.0 * p.newton_tol);
                if (damping == 0.0) {
                    const double Lz = angular_momentum(tri, s.q, s.v)[2];
                    CHECK(std::abs(Lz - Lz_prev) <= 10.0 * p.newton_tol * (1.0 + std::abs(Lz)));
                    Lz_prev = Lz;
                }
                H_prev = H;
            }
        }
    }
}
