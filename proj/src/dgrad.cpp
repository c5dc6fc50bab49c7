#include "phsim/dgrad.hpp"

#include <sstream>

namespace phsim {

void DGradParams::validate() const
{
    if (!(fallback_threshold > 0.0) || !std::isfinite(fallback_threshold)) {
        std::ostringstream os;
        os << "DGradParams: fallback_threshold must be positive, got " << fallback_threshold;
        throw std::invalid_argument(os.str());
    }
}

Vector internal_energy_dg(const MechanicalSystem& sys, const Vector& C0, const Vector& C1,
                          const DGradParams& params)
{
    if (static_cast<std::size_t>(C0.size()) != sys.n_elements() || C0.size() != C1.size())
        throw DimensionError("internal_energy_dg: strain vectors do not match the system");
    check_strains(C0);
    check_strains(C1);
    Vector dg(C0.size());
    for (std::size_t i = 0; i < sys.n_elements(); ++i) {
        const auto& e = sys.elements()[i];
        dg[i] = greenspan_dg_increment(
            [&](double a, double b) { return element_energy_increment(e, a, b); },
            [&](double c) { return element_energy_derivative(e, c); }, C0[i], C1[i], params);
    }
    return dg;
}

Vector internal_energy_dg_derivative(const MechanicalSystem& sys, const Vector& C0,
                                     const Vector& C1, const DGradParams& params)
{
    check_strains(C0);
    check_strains(C1);
    Vector d(C0.size());
    for (std::size_t i = 0; i < sys.n_elements(); ++i) {
        const auto& e = sys.elements()[i];
        const double c0 = C0[i];
        const double c1 = C1[i];
        const double delta = c1 - c0;
        if (detail::coincident(std::abs(delta), std::max(std::abs(c0), std::abs(c1)), params)) {
            d[i] = 0.5 * element_energy_second_derivative(e, 0.5 * (c0 + c1));
        } else {
            const double quotient = element_energy_increment(e, c0, c1) / delta;
            d[i] = (element_energy_derivative(e, c1) - quotient) / delta;
        }
    }
    return d;
}

Vector discrete_hamiltonian_gradient(const MechanicalSystem& sys, const State& x0,
                                     const State& x1, const DGradParams& params)
{
    check_state(sys, x0);
    check_state(sys, x1);
    Vector dg(sys.state_size());
    const auto n = static_cast<Eigen::Index>(sys.n_dofs());
    dg.segment(0, n) = sys.external().discrete_gradient(x0.q, x1.q, params);
    dg.segment(n, n) = sys.mass_times(0.5 * (x0.v + x1.v));
    dg.tail(sys.n_elements()) = internal_energy_dg(sys, x0.C, x1.C, params);
    return dg;
}

} // namespace phsim
