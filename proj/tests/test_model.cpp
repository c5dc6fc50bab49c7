#include <doctest.h>

#include <cmath>

#include "phsim/model.hpp"
#include "test_support.hpp"

using namespace phsim;
using namespace phsim::testing;

TEST_CASE("strain_map")
{
    const auto sys = pendulum();
    Vector q(3);

    q << 1.1, 0.0, 0.0;
    CHECK(strain_map(sys, q)[0] == doctest::Approx(1.21).epsilon(1e-15));

    q << 0.0, 0.6, -0.8; // |q| = l0
    CHECK(strain_map(sys, q)[0] == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(strain_map(sys, Vector::Zero(3))[0] == 0.0);

    CHECK_THROWS_AS(strain_map(sys, Vector::Zero(4)), DimensionError);
}

TEST_CASE("strain_map uses general linear combinations")
{
    // qbar = 2 q_0 - q_1 + 0.5 q_2, l0 = 2
    const MechanicalSystem sys({1.0, 1.0, 1.0}, {{5.0, 2.0, {{0, 2.0}, {1, -1.0}, {2, 0.5}}}},
                               Vec3::Zero());
    Vector q(9);
    q << 1, 0, 0, 0, 1, 0, 0, 0, 2;
    const Vec3 qbar(2.0, -1.0, 1.0);
    CHECK(strain_map(sys, q)[0] == doctest::Approx(qbar.squaredNorm() / 4.0));
}

TEST_CASE("strain_jacobian")
{
    const auto sys = pendulum();
    Vector q(3);
    q << 1.1, 0.0, 0.0;

    SUBCASE("matches the closed form and central differences")
    {
        const Matrix G = strain_jacobian(sys, q);
        CHECK(G(0, 0) == doctest::Approx(2.2));
        CHECK(G(0, 1) == 0.0);
        CHECK(G(0, 2) == 0.0);
        const Matrix fd = central_difference_jacobian(
            [&](const Vector& x) { return strain_map(sys, x); }, q);
        CHECK(max_abs(G - fd) <= 1e-7);
    }

    SUBCASE("vanishes at the origin")
    {
        CHECK(max_abs(strain_jacobian(sys, Vector::Zero(3))) == 0.0);
    }

    SUBCASE("two-endpoint spring blocks are opposite")
    {
        const MechanicalSystem two({1.0, 2.0}, {ElasticElement::spring(0, 1, 10.0, 0.7)},
                                   Vec3::Zero());
        Vector q2(6);
        q2 << 0.3, -0.2, 0.9, -0.4, 0.5, 0.1;
        const Matrix G = strain_jacobian(two, q2);
        CHECK(max_abs(G.block(0, 0, 1, 3) + G.block(0, 3, 1, 3)) == 0.0);
    }
}

TEST_CASE("internal_energy")
{
    const auto sys = pendulum();
    CHECK(internal_energy(sys, Vector::Constant(1, 1.0)) == 0.0);
    CHECK(internal_energy(sys, Vector::Constant(1, 1.21)) ==
          doctest::Approx(48.449100978375700).epsilon(1e-13));

    SUBCASE("log barrier under compression")
    {
        double previous = internal_energy(sys, Vector::Constant(1, 1.0));
        for (double C = 0.9; C > 1e-12; C *= 0.1) {
            const double V = internal_energy(sys, Vector::Constant(1, C));
            CHECK(V > previous);
            // k l0 / 4 (-ln C - 1) dominates as C -> 0
            CHECK(V == doctest::Approx(2500.0 * (C - std::log(C) - 1.0)).epsilon(1e-13));
            previous = V;
        }
    }

    SUBCASE("non-positive strain names the element")
    {
        const MechanicalSystem two({1.0, 1.0},
                                   {ElasticElement::spring(0, 1, 1.0, 1.0),
                                    ElasticElement::anchored(1, 1.0, 1.0)},
                                   Vec3::Zero());
        Vector C(2);
        C << 1.0, -0.5;
        try {
            internal_energy(two, C);
            FAIL("expected StrainDomainError");
        } catch (const StrainDomainError& e) {
            CHECK(e.element() == 1);
            CHECK(e.value() == -0.5);
            CHECK(std::string(e.what()).find("element 1") != std::string::npos);
        }
        C << 0.0, 1.0;
        CHECK_THROWS_AS(internal_energy(two, C), StrainDomainError);
    }

    SUBCASE("non-negative, zero only at the rest strain")
    {
        RandomTriangle gen(7);
        const auto tri = gen.system();
        for (int i = 0; i < 200; ++i) {
            const State x = gen.state(tri);
            CHECK(internal_energy(tri, x.C) > 0.0);
        }
        CHECK(internal_energy(tri, Vector::Ones(3)) == 0.0);
    }
}

TEST_CASE("element_energy_increment agrees with the direct difference")
{
    const ElasticElement e = ElasticElement::anchored(0, 1e4, 1.0);
    for (double c0 : {0.3, 0.9, 1.0, 1.21, 3.0}) {
        for (double c1 : {0.31, 1.0, 1.3, 2.5}) {
            const double direct = element_energy(e, c1) - element_energy(e, c0);
            CHECK(element_energy_increment(e, c0, c1) ==
                  doctest::Approx(direct).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("stress")
{
    const auto sys = pendulum();
    CHECK(stress(sys, Vector::Constant(1, 1.0))[0] == 0.0);
    CHECK(stress(sys, Vector::Constant(1, 1.21))[0] ==
          doctest::Approx(867.76859504132231).epsilon(1e-14));
    CHECK(stress(sys, Vector::Constant(1, 0.8))[0] < 0.0);
    CHECK_THROWS_AS(stress(sys, Vector::Constant(1, 0.0)), StrainDomainError);
}

TEST_CASE("hamiltonian")
{
    const auto sys = pendulum();
    const State x0 = pendulum_initial_state();
    CHECK(hamiltonian(sys, x0) == doctest::Approx(49.449100978375700).epsilon(1e-13));

    const State rest{Vector::Zero(3), Vector::Zero(3), Vector::Ones(1)};
    CHECK(hamiltonian(sys, rest) == 0.0);

    State doubled = x0;
    doubled.v *= 2.0;
    CHECK(kinetic_energy(sys, doubled.v) == doctest::Approx(4.0 * kinetic_energy(sys, x0.v)));
    CHECK(hamiltonian(sys, doubled) - hamiltonian(sys, x0) ==
          doctest::Approx(3.0 * kinetic_energy(sys, x0.v)));

    SUBCASE("external energy is -m b . q")
    {
        State lifted = rest;
        lifted.q[2] = 2.0;
        CHECK(external_energy(sys, lifted.q) == doctest::Approx(2.0 * kGravity));
    }
}

TEST_CASE("hamiltonian is invariant under rotations about the gravity axis")
{
    RandomTriangle gen(11);
    const auto sys = gen.system();
    for (int i = 0; i < 50; ++i) {
        const State x = gen.consistent_state(sys);
        const double angle = gen.uniform(-3.0, 3.0);
        const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
        State rotated = x;
        for (std::size_t k = 0; k < sys.n_points(); ++k) {
            rotated.q.segment<3>(3 * k) = R * x.q.segment<3>(3 * k);
            rotated.v.segment<3>(3 * k) = R * x.v.segment<3>(3 * k);
        }
        rotated.C = strain_map(sys, rotated.q);
        const double H = hamiltonian(sys, x);
        CHECK(std::abs(hamiltonian(sys, rotated) - H) <= 1e-12 * std::max(1.0, std::abs(H)));
    }
}

TEST_CASE("efforts")
{
    const auto sys = pendulum();
    const State x0 = pendulum_initial_state();

    const Efforts z = efforts(sys, x0);
    CHECK(z.dVext[0] == 0.0);
    CHECK(z.dVext[1] == 0.0);
    CHECK(z.dVext[2] == doctest::Approx(9.81));
    CHECK(z.p[0] == 0.0);
    CHECK(z.p[1] == 1.0);
    CHECK(z.p[2] == 1.0);
    CHECK(z.half_S[0] == doctest::Approx(433.88429752066116).epsilon(1e-14));

    State at_rest = x0;
    at_rest.v.setZero();
    CHECK(efforts(sys, at_rest).p.isZero(0.0));

    SUBCASE("matches central differences of the Hamiltonian")
    {
        const Vector g = hamiltonian_gradient(sys, x0);
        const Vector fd = central_difference(
            [&](const Vector& x) { return hamiltonian(sys, State::unstack(sys, x)); },
            x0.stacked());
        CHECK((g - fd).lpNorm<Eigen::Infinity>() <= 1e-7 * std::max(1.0, g.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("structure and descriptor matrices")
{
    const auto sys = pendulum();
    Vector q(3);
    q << 1.1, 0.0, 0.0;
    const Matrix J = structure_matrix(sys, q);
    CHECK(J.rows() == 7);
    CHECK(max_abs(J + J.transpose()) == 0.0);
    CHECK(max_abs(J.block(6, 3, 1, 3) - strain_jacobian(sys, q)) == 0.0);
    CHECK(max_abs(J.block(0, 3, 3, 3) - Matrix::Identity(3, 3)) == 0.0);

    RandomTriangle gen(3);
    const auto tri = gen.system();
    for (int i = 0; i < 20; ++i) {
        const Matrix Jt = structure_matrix(tri, gen.state(tri).q);
        CHECK(max_abs(Jt + Jt.transpose()) == 0.0);
    }

    const Matrix E = descriptor_matrix(tri);
    CHECK(max_abs(E - E.transpose()) == 0.0);
    double min_mass = 1.0;
    for (double m : tri.masses())
        min_mass = std::min(min_mass, m);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(E);
    CHECK(eig.eigenvalues().minCoeff() >= min_mass - 1e-15);

    const Matrix B = input_matrix(tri);
    CHECK(B.rows() == 21);
    CHECK(B.cols() == 9);
    CHECK(max_abs(B.middleRows(9, 9) - Matrix::Identity(9, 9)) == 0.0);
    CHECK(B.topRows(9).isZero(0.0));
    CHECK(B.bottomRows(3).isZero(0.0));
}

TEST_CASE("momenta_state")
{
    const auto sys = pendulum();
    const State x0 = pendulum_initial_state();
    const MomentaState m = momenta_state(sys, x0);
    CHECK(m.p == x0.v);
    CHECK(m.q == x0.q);
    CHECK(m.C == x0.C);

    RandomTriangle gen(5);
    const auto tri = gen.system();
    const State x = gen.state(tri);
    const State back = from_momenta_state(tri, momenta_state(tri, x));
    CHECK((back.stacked() - x.stacked()).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("angular_momentum")
{
    const auto sys = pendulum();
    const State x0 = pendulum_initial_state();
    const Vec3 L = angular_momentum(sys, x0.q, x0.v);
    CHECK(L[0] == 0.0);
    CHECK(L[1] == doctest::Approx(-1.1));
    CHECK(L[2] == doctest::Approx(1.1));

    CHECK(angular_momentum(sys, x0.q, Vector::Zero(3)).isZero(0.0));
    CHECK(angular_momentum(sys, x0.q, 3.0 * x0.q).norm() == 0.0);
}

TEST_CASE("MechanicalSystem validation")
{
    CHECK_THROWS_AS(MechanicalSystem({-1.0}, {}, Vec3::Zero()), std::invalid_argument);
    CHECK_THROWS_AS(MechanicalSystem({}, {}, Vec3::Zero()), std::invalid_argument);
    CHECK_THROWS_AS(MechanicalSystem({1.0}, {ElasticElement::spring(0, 1, 1.0, 1.0)}, Vec3::Zero()),
                    std::invalid_argument);
    CHECK_THROWS_AS(MechanicalSystem({1.0}, {ElasticElement::anchored(0, 1.0, 0.0)}, Vec3::Zero()),
                    std::invalid_argument);
    CHECK_THROWS_AS(MechanicalSystem({1.0}, {{1.0, 1.0, {{0, 0.0}}}}, Vec3::Zero()),
                    std::invalid_argument);
    CHECK_THROWS_AS(MechanicalSystem({1.0}, {}, Vec3::Zero(), Matrix::Identity(2, 2)),
                    DimensionError);
    CHECK_NOTHROW(MechanicalSystem({1.0}, {}, Vec3::Zero(), Matrix::Zero(3, 1)));
}
