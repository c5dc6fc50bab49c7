#include "phsim/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "phsim/dgrad.hpp"

namespace phsim {

namespace {

std::string describe_strain(std::size_t element, double value)
{
    std::ostringstream os;
    os << "strain of element " << element << " is " << value
       << "; the stored energy requires C > 0";
    return os.str();
}

void check_dofs(const MechanicalSystem& sys, const Vector& x, const char* what)
{
    if (static_cast<std::size_t>(x.size()) != sys.n_dofs()) {
        std::ostringstream os;
        os << what << ": expected " << sys.n_dofs() << " entries, got " << x.size();
        throw DimensionError(os.str());
    }
}

void check_elements(const MechanicalSystem& sys, const Vector& C, const char* what)
{
    if (static_cast<std::size_t>(C.size()) != sys.n_elements()) {
        std::ostringstream os;
        os << what << ": expected " << sys.n_elements() << " strains, got " << C.size();
        throw DimensionError(os.str());
    }
}

} // namespace

// errors.hpp

StrainDomainError::StrainDomainError(std::size_t element, double value)
    : std::domain_error(describe_strain(element, value)), element_(element), value_(value)
{
}

StepError::StepError(const std::string& what)
    : std::runtime_error(what), base_(what), message_(what)
{
}

void StepError::set_step_index(std::size_t step)
{
    step_ = step;
    message_ = "step " + std::to_string(step) + ": " + base_;
}

NonConvergenceError::NonConvergenceError(int iterations, double residual_norm)
    : StepError([&] {
          std::ostringstream os;
          os << "Newton iteration did not converge after " << iterations
             << " iterations (residual norm " << residual_norm << ")";
          return os.str();
      }()),
      iterations_(iterations), residual_norm_(residual_norm)
{
}

StrainDomainViolation::StrainDomainViolation(std::size_t element, double value, int iteration)
    : StepError(describe_strain(element, value) + " (Newton iteration " +
                std::to_string(iteration) + ")"),
      element_(element), value_(value), iteration_(iteration)
{
}

// Elements

ElasticElement ElasticElement::spring(std::size_t first, std::size_t second,
                                      double stiffness, double rest_length)
{
    return {stiffness, rest_length, {{first, 1.0}, {second, -1.0}}};
}

ElasticElement ElasticElement::anchored(std::size_t point, double stiffness, double rest_length)
{
    return {stiffness, rest_length, {{point, 1.0}}};
}

// External potentials

Vector ExternalPotential::discrete_gradient(const Vector& q0, const Vector& q1,
                                            const DGradParams& params) const
{
    return gonzalez_dg([this](const Vector& q) { return value(q); },
                       [this](const Vector& q) { return gradient(q); }, q0, q1, params);
}

Matrix ExternalPotential::discrete_gradient_jacobian(const Vector& q0, const Vector& q1,
                                                     const DGradParams& params) const
{
    const Eigen::Index n = q1.size();
    Matrix jac(n, n);
    const Vector base = discrete_gradient(q0, q1, params);
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
    Vector probe = q1;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double step = eps * (1.0 + std::abs(q1[j]));
        probe[j] = q1[j] + step;
        jac.col(j) = (discrete_gradient(q0, probe, params) - base) / step;
        probe[j] = q1[j];
    }
    return jac;
}

UniformGravity::UniformGravity(Vec3 field, std::vector<double> masses)
    : field_(std::move(field)), masses_(std::move(masses))
{
}

double UniformGravity::value(const Vector& q) const
{
    double v = 0.0;
    for (std::size_t k = 0; k < masses_.size(); ++k)
        v -= masses_[k] * field_.dot(q.segment<3>(3 * k));
    return v;
}

Vector UniformGravity::gradient(const Vector& q) const
{
    Vector g(q.size());
    for (std::size_t k = 0; k < masses_.size(); ++k)
        g.segment<3>(3 * k) = -masses_[k] * field_;
    return g;
}

// Linear potential: every discrete gradient equals the constant gradient.
Vector UniformGravity::discrete_gradient(const Vector& q0, const Vector&, const DGradParams&) const
{
    return gradient(q0);
}

Matrix UniformGravity::discrete_gradient_jacobian(const Vector& q0, const Vector&,
                                                  const DGradParams&) const
{
    return Matrix::Zero(q0.size(), q0.size());
}

// MechanicalSystem

MechanicalSystem::MechanicalSystem(std::vector<double> masses,
                                   std::vector<ElasticElement> elements, const Vec3& gravity,
                                   std::optional<Matrix> input_map)
    : masses_(std::move(masses)), elements_(std::move(elements))
{
    external_ = std::make_shared<UniformGravity>(gravity, masses_);
    input_map_ = input_map ? std::move(*input_map) : Matrix::Identity(n_dofs(), n_dofs());
    validate();
}

MechanicalSystem::MechanicalSystem(std::vector<double> masses,
                                   std::vector<ElasticElement> elements,
                                   std::shared_ptr<const ExternalPotential> external,
                                   std::optional<Matrix> input_map)
    : masses_(std::move(masses)), elements_(std::move(elements)), external_(std::move(external))
{
    if (!external_)
        throw std::invalid_argument("MechanicalSystem: null external potential");
    input_map_ = input_map ? std::move(*input_map) : Matrix::Identity(n_dofs(), n_dofs());
    validate();
}

void MechanicalSystem::validate() const
{
    if (masses_.empty())
        throw std::invalid_argument("MechanicalSystem: at least one point mass is required");
    for (std::size_t k = 0; k < masses_.size(); ++k) {
        if (!(masses_[k] > 0.0) || !std::isfinite(masses_[k])) {
            std::ostringstream os;
            os << "MechanicalSystem: mass of point " << k << " must be positive, got "
               << masses_[k];
            throw std::invalid_argument(os.str());
        }
    }
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const auto& e = elements_[i];
        std::ostringstream os;
        os << "MechanicalSystem: element " << i << ": ";
        if (!(e.rest_length > 0.0) || !std::isfinite(e.rest_length)) {
            os << "rest length must be positive, got " << e.rest_length;
            throw std::invalid_argument(os.str());
        }
        if (!(e.stiffness >= 0.0) || !std::isfinite(e.stiffness)) {
            os << "stiffness must be non-negative, got " << e.stiffness;
            throw std::invalid_argument(os.str());
        }
        bool any_nonzero = false;
        for (const auto& [point, a] : e.coefficients) {
            if (point >= masses_.size()) {
                os << "coefficient references point " << point << " but the system has "
                   << masses_.size() << " points";
                throw std::invalid_argument(os.str());
            }
            any_nonzero = any_nonzero || a != 0.0;
        }
        if (!any_nonzero) {
            os << "needs at least one nonzero coefficient";
            throw std::invalid_argument(os.str());
        }
    }
    if (static_cast<std::size_t>(input_map_.rows()) != n_dofs()) {
        std::ostringstream os;
        os << "MechanicalSystem: input map must have " << n_dofs() << " rows, got "
           << input_map_.rows();
        throw DimensionError(os.str());
    }
}

Vec3 MechanicalSystem::gravity() const
{
    return external_->uniform_field().value_or(Vec3::Zero());
}

Vector MechanicalSystem::mass_times(const Vector& v) const
{
    check_dofs(*this, v, "mass_times");
    Vector p(v.size());
    for (std::size_t k = 0; k < masses_.size(); ++k)
        p.segment<3>(3 * k) = masses_[k] * v.segment<3>(3 * k);
    return p;
}

// State

Vector State::stacked() const
{
    Vector x(q.size() + v.size() + C.size());
    x << q, v, C;
    return x;
}

State State::unstack(const MechanicalSystem& sys, const Vector& x)
{
    if (static_cast<std::size_t>(x.size()) != sys.state_size())
        throw DimensionError("State::unstack: stacked vector has the wrong length");
    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    const auto m = static_cast<Eigen::Index>(sys.n_elements());
    return {x.segment(0, n), x.segment(n, n), x.segment(2 * n, m)};
}

void check_state(const MechanicalSystem& sys, const State& x)
{
    check_dofs(sys, x.q, "state positions");
    check_dofs(sys, x.v, "state velocities");
    check_elements(sys, x.C, "state strains");
}

// Kinematics

Vec3 element_vector(const ElasticElement& element, const Vector& q)
{
    Vec3 qbar = Vec3::Zero();
    for (const auto& [point, a] : element.coefficients)
        qbar += a * q.segment<3>(3 * static_cast<Eigen::Index>(point));
    return qbar;
}

Vector strain_map(const MechanicalSystem& sys, const Vector& q)
{
    check_dofs(sys, q, "strain_map");
    const auto& elements = sys.elements();
    Vector C(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const double l0 = elements[i].rest_length;
        C[i] = element_vector(elements[i], q).squaredNorm() / (l0 * l0);
    }
    return C;
}

Matrix strain_jacobian(const MechanicalSystem& sys, const Vector& q)
{
    check_dofs(sys, q, "strain_jacobian");
    const auto& elements = sys.elements();
    Matrix G = Matrix::Zero(elements.size(), q.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const auto& e = elements[i];
        const Vec3 qbar = element_vector(e, q) * (2.0 / (e.rest_length * e.rest_length));
        for (const auto& [point, a] : e.coefficients)
            G.row(i).segment<3>(3 * static_cast<Eigen::Index>(point)) += a * qbar.transpose();
    }
    return G;
}

// Energies

double element_energy(const ElasticElement& e, double C)
{
    return 0.25 * e.stiffness * e.rest_length * (C - std::log(C) - 1.0);
}

double element_energy_derivative(const ElasticElement& e, double C)
{
    return 0.25 * e.stiffness * e.rest_length * (1.0 - 1.0 / C);
}

double element_energy_second_derivative(const ElasticElement& e, double C)
{
    return 0.25 * e.stiffness * e.rest_length / (C * C);
}

double element_energy_increment(const ElasticElement& e, double c0, double c1)
{
    const double delta = c1 - c0;
    return 0.25 * e.stiffness * e.rest_length * (delta - std::log1p(delta / c0));
}

void check_strains(const Vector& C)
{
    for (Eigen::Index i = 0; i < C.size(); ++i)
        if (!(C[i] > 0.0))
            throw StrainDomainError(static_cast<std::size_t>(i), C[i]);
}

double internal_energy(const MechanicalSystem& sys, const Vector& C)
{
    check_elements(sys, C, "internal_energy");
    check_strains(C);
    double V = 0.0;
    for (std::size_t i = 0; i < sys.n_elements(); ++i)
        V += element_energy(sys.elements()[i], C[i]);
    return V;
}

Vector stress(const MechanicalSystem& sys, const Vector& C)
{
    check_elements(sys, C, "stress");
    check_strains(C);
    Vector S(C.size());
    for (std::size_t i = 0; i < sys.n_elements(); ++i)
        S[i] = 2.0 * element_energy_derivative(sys.elements()[i], C[i]);
    return S;
}

double kinetic_energy(const MechanicalSystem& sys, const Vector& v)
{
    return 0.5 * v.dot(sys.mass_times(v));
}

double external_energy(const MechanicalSystem& sys, const Vector& q)
{
    check_dofs(sys, q, "external_energy");
    return sys.external().value(q);
}

double hamiltonian(const MechanicalSystem& sys, const State& x)
{
    check_state(sys, x);
    return kinetic_energy(sys, x.v) + internal_energy(sys, x.C) + external_energy(sys, x.q);
}

Efforts efforts(const MechanicalSystem& sys, const State& x)
{
    check_state(sys, x);
    return {sys.external().gradient(x.q), sys.mass_times(x.v), 0.5 * stress(sys, x.C)};
}

Vector hamiltonian_gradient(const MechanicalSystem& sys, const State& x)
{
    const Efforts z = efforts(sys, x);
    Vector g(sys.state_size());
    g << z.dVext, z.p, z.half_S;
    return g;
}

// Structure

Matrix structure_matrix(const MechanicalSystem& sys, const Vector& q)
{
    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    const auto m = static_cast<Eigen::Index>(sys.n_elements());
    const Matrix G = strain_jacobian(sys, q);
    Matrix J = Matrix::Zero(2 * n + m, 2 * n + m);
    J.block(0, n, n, n).setIdentity();
    J.block(n, 0, n, n) = -Matrix::Identity(n, n);
    J.block(n, 2 * n, n, m) = -G.transpose();
    J.block(2 * n, n, m, n) = G;
    return J;
}

Matrix descriptor_matrix(const MechanicalSystem& sys)
{
    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    Matrix E = Matrix::Identity(sys.state_size(), sys.state_size());
    for (std::size_t k = 0; k < sys.n_points(); ++k)
        E.block<3, 3>(n + 3 * k, n + 3 * k) *= sys.masses()[k];
    return E;
}

Matrix input_matrix(const MechanicalSystem& sys)
{
    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    Matrix B = Matrix::Zero(sys.state_size(), sys.n_inputs());
    B.middleRows(n, n) = sys.input_map();
    return B;
}

MomentaState momenta_state(const MechanicalSystem& sys, const State& x)
{
    check_state(sys, x);
    return {x.q, sys.mass_times(x.v), x.C};
}

State from_momenta_state(const MechanicalSystem& sys, const MomentaState& x)
{
    check_dofs(sys, x.p, "from_momenta_state");
    Vector v(x.p.size());
    for (std::size_t k = 0; k < sys.n_points(); ++k)
        v.segment<3>(3 * k) = x.p.segment<3>(3 * k) / sys.masses()[k];
    State s{x.q, std::move(v), x.C};
    check_state(sys, s);
    return s;
}

Vec3 angular_momentum(const MechanicalSystem& sys, const Vector& q, const Vector& v)
{
    check_dofs(sys, q, "angular_momentum positions");
    check_dofs(sys, v, "angular_momentum velocities");
    Vec3 L = Vec3::Zero();
    for (std::size_t k = 0; k < sys.n_points(); ++k) {
        const Vec3 qk = q.segment<3>(3 * k);
        const Vec3 vk = v.segment<3>(3 * k);
        L += sys.masses()[k] * qk.cross(vk);
    }
    return L;
}

} // namespace phsim
