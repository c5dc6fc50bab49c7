#pragma once

/**
 * @file model.hpp
 * @brief Discrete hyperelastic mass-spring systems in port-Hamiltonian form.
 *
 * The state is x = (q, v, C): point positions and velocities (grouped per
 * point, 3 entries each) followed by one Cauchy-Green strain per element.
 * The state equations read
 *
 *     E xdot = J(q) z + B u,    E^T z = grad H(x),    y = B^T z
 *
 * with E = diag(I, M, I) and the skew structure matrix
 *
 *     J(q) = [  0    I     0   ]
 *            [ -I    0   -G^T  ]
 *            [  0    G     0   ]      G = d Ctilde / dq.
 */

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phsim/errors.hpp"

namespace phsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

struct DGradParams;

/// Hyperelastic element with stored energy (k l0 / 4)(C - ln C - 1).
///
/// The element vector is qbar = sum_j a_j q_j over its coefficient map.
struct ElasticElement {
    double stiffness = 0.0;   ///< k [N]
    double rest_length = 1.0; ///< l0 [m]
    std::vector<std::pair<std::size_t, double>> coefficients;

    /// Two-endpoint spring, qbar = q_first - q_second.
    static ElasticElement spring(std::size_t first, std::size_t second,
                                 double stiffness, double rest_length);

    /// Spring from the origin to one point, qbar = q_point.
    static ElasticElement anchored(std::size_t point, double stiffness,
                                   double rest_length);
};

/// Potential energy of external (conservative) loads on the positions.
///
/// Only UniformGravity ships. Other potentials must supply value and
/// gradient; the discrete gradient defaults to the Gonzalez midpoint form.
class ExternalPotential {
public:
    virtual ~ExternalPotential() = default;

    virtual double value(const Vector& q) const = 0;
    virtual Vector gradient(const Vector& q) const = 0;

    virtual Vector discrete_gradient(const Vector& q0, const Vector& q1,
                                     const DGradParams& params) const;

    /// d(discrete_gradient)/d(q1); forward differences unless overridden.
    virtual Matrix discrete_gradient_jacobian(const Vector& q0, const Vector& q1,
                                              const DGradParams& params) const;

    /// Constant force field per unit mass, if the potential is of that kind.
    virtual std::optional<Vec3> uniform_field() const { return std::nullopt; }
};

/// V_ext(q) = -sum_k m_k b . q_k
class UniformGravity final : public ExternalPotential {
public:
    UniformGravity(Vec3 field, std::vector<double> masses);

    double value(const Vector& q) const override;
    Vector gradient(const Vector& q) const override;
    Vector discrete_gradient(const Vector& q0, const Vector& q1,
                             const DGradParams& params) const override;
    Matrix discrete_gradient_jacobian(const Vector& q0, const Vector& q1,
                                      const DGradParams& params) const override;
    std::optional<Vec3> uniform_field() const override { return field_; }

private:
    Vec3 field_;
    std::vector<double> masses_;
};

/// Immutable description of a mechanical system. Safe to share between
/// concurrent simulations.
class MechanicalSystem {
public:
    /// Gravity-loaded system with the input map defaulting to identity on
    /// the velocity equations.
    MechanicalSystem(std::vector<double> masses, std::vector<ElasticElement> elements,
                     const Vec3& gravity, std::optional<Matrix> input_map = std::nullopt);

    /// System with a user-supplied external potential.
    MechanicalSystem(std::vector<double> masses, std::vector<ElasticElement> elements,
                     std::shared_ptr<const ExternalPotential> external,
                     std::optional<Matrix> input_map = std::nullopt);

    std::size_t n_points() const noexcept { return masses_.size(); }
    std::size_t n_elements() const noexcept { return elements_.size(); }
    std::size_t n_dofs() const noexcept { return 3 * masses_.size(); }
    std::size_t n_inputs() const noexcept { return static_cast<std::size_t>(input_map_.cols()); }
    /// Length of the stacked state (q, v, C): 6N + n_el.
    std::size_t state_size() const noexcept { return 2 * n_dofs() + n_elements(); }

    const std::vector<double>& masses() const noexcept { return masses_; }
    const std::vector<ElasticElement>& elements() const noexcept { return elements_; }
    const ExternalPotential& external() const noexcept { return *external_; }
    /// b for gravity-loaded systems, zero otherwise.
    Vec3 gravity() const;
    /// B restricted to the velocity block (3N x n_u).
    const Matrix& input_map() const noexcept { return input_map_; }

    /// M v, applied blockwise.
    Vector mass_times(const Vector& v) const;

private:
    void validate() const;

    std::vector<double> masses_;
    std::vector<ElasticElement> elements_;
    std::shared_ptr<const ExternalPotential> external_;
    Matrix input_map_;
};

struct State {
    Vector q;
    Vector v;
    Vector C;

    /// Stacked (q, v, C).
    Vector stacked() const;
    static State unstack(const MechanicalSystem& sys, const Vector& x);
};

/// Co-state z = (grad V_ext, M v, S/2).
struct Efforts {
    Vector dVext;
    Vector p;
    Vector half_S;
};

/// State in canonical coordinates (q, p, C) with p = M v.
struct MomentaState {
    Vector q;
    Vector p;
    Vector C;
};

void check_state(const MechanicalSystem& sys, const State& x);

// Kinematics

/// qbar_i = sum_j a_ij q_j
Vec3 element_vector(const ElasticElement& element, const Vector& q);
Vector strain_map(const MechanicalSystem& sys, const Vector& q);
/// Rows dCtilde_i/dq, shape n_el x 3N.
Matrix strain_jacobian(const MechanicalSystem& sys, const Vector& q);

// Energies. The per-element functions assume C > 0; the system-level ones
// check it.

double element_energy(const ElasticElement& element, double C);
/// dV_i/dC = (k l0 / 4)(1 - 1/C)
double element_energy_derivative(const ElasticElement& element, double C);
double element_energy_second_derivative(const ElasticElement& element, double C);
/// V_i(c1) - V_i(c0), evaluated without cancellation for close arguments.
double element_energy_increment(const ElasticElement& element, double c0, double c1);

/// Throws StrainDomainError naming the first element with C_i <= 0.
void check_strains(const Vector& C);

double internal_energy(const MechanicalSystem& sys, const Vector& C);
/// Work-conjugate stresses S_i = 2 dV_i/dC_i.
Vector stress(const MechanicalSystem& sys, const Vector& C);
double kinetic_energy(const MechanicalSystem& sys, const Vector& v);
double external_energy(const MechanicalSystem& sys, const Vector& q);
double hamiltonian(const MechanicalSystem& sys, const State& x);

Efforts efforts(const MechanicalSystem& sys, const State& x);
/// grad H(x) stacked as (grad V_ext, M v, S/2).
Vector hamiltonian_gradient(const MechanicalSystem& sys, const State& x);

// Port-Hamiltonian structure

/// Skew structure matrix J(q), (6N + n_el) square.
Matrix structure_matrix(const MechanicalSystem& sys, const Vector& q);
/// E = diag(I, M, I).
Matrix descriptor_matrix(const MechanicalSystem& sys);
/// Full input matrix, the velocity-block input map padded with zero rows.
Matrix input_matrix(const MechanicalSystem& sys);

MomentaState momenta_state(const MechanicalSystem& sys, const State& x);
State from_momenta_state(const MechanicalSystem& sys, const MomentaState& x);

/// L = sum_k q_k x m_k v_k
Vec3 angular_momentum(const MechanicalSystem& sys, const Vector& q, const Vector& v);

} // namespace phsim
