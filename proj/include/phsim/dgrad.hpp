#pragma once

/**
 * @file dgrad.hpp
 * @brief Discrete gradients.
 *
 * A discrete gradient DG f(x0, x1) is a two-point replacement of grad f
 * with the directionality property DG f(x0, x1) . (x1 - x0) = f(x1) - f(x0)
 * and DG f(x, x) = grad f(x).
 */

#include <algorithm>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <utility>

#include "phsim/model.hpp"

namespace phsim {

struct DGradParams {
    /// Relative separation below which the analytic gradient at the
    /// midpoint replaces the difference quotient.
    double fallback_threshold = 1e-10;

    void validate() const;
};

namespace detail {

inline bool coincident(double separation, double scale, const DGradParams& params)
{
    return separation <= params.fallback_threshold * std::max(1.0, scale);
}

} // namespace detail

/// Greenspan's scalar difference quotient, with the increment f(c1) - f(c0)
/// supplied directly so that callers can evaluate it without cancellation.
template <typename Increment, typename Grad>
    requires std::invocable<Increment, double, double> && std::invocable<Grad, double>
double greenspan_dg_increment(Increment&& increment, Grad&& grad, double c0, double c1,
                              const DGradParams& params)
{
    const double delta = c1 - c0;
    if (detail::coincident(std::abs(delta), std::max(std::abs(c0), std::abs(c1)), params))
        return grad(0.5 * (c0 + c1));
    return increment(c0, c1) / delta;
}

/// (f(c1) - f(c0)) / (c1 - c0), or f'((c0 + c1)/2) for coincident arguments.
template <typename Value, typename Grad>
    requires std::invocable<Value, double> && std::invocable<Grad, double>
double greenspan_dg(Value&& value, Grad&& grad, double c0, double c1, const DGradParams& params)
{
    return greenspan_dg_increment(
        [&](double a, double b) { return value(b) - value(a); },
        std::forward<Grad>(grad), c0, c1, params);
}

/// Gonzalez midpoint discrete gradient
///
///     g_mid + (f(x1) - f(x0) - g_mid . dx) / (dx . dx) * dx,
///     g_mid = grad f((x0 + x1)/2),  dx = x1 - x0.
template <typename Value, typename Grad>
    requires std::invocable<Value, const Vector&> && std::invocable<Grad, const Vector&>
Vector gonzalez_dg(Value&& value, Grad&& grad, const Vector& x0, const Vector& x1,
                   const DGradParams& params)
{
    if (x0.size() != x1.size())
        throw DimensionError("gonzalez_dg: points of different dimension");
    const Vector dx = x1 - x0;
    const Vector mid = 0.5 * (x0 + x1);
    Vector g_mid = grad(mid);
    const double scale = std::max(x0.norm(), x1.norm());
    if (detail::coincident(dx.norm(), scale, params))
        return g_mid;
    const double defect = value(x1) - value(x0) - g_mid.dot(dx);
    g_mid += (defect / dx.squaredNorm()) * dx;
    return g_mid;
}

/// DG V_int(C0, C1), Greenspan per element.
Vector internal_energy_dg(const MechanicalSystem& sys, const Vector& C0, const Vector& C1,
                          const DGradParams& params);

/// d(internal_energy_dg)/d(C1); diagonal.
Vector internal_energy_dg_derivative(const MechanicalSystem& sys, const Vector& C0,
                                     const Vector& C1, const DGradParams& params);

/// Stacked (DG V_ext(q0, q1), M (v0 + v1)/2, DG V_int(C0, C1)).
Vector discrete_hamiltonian_gradient(const MechanicalSystem& sys, const State& x0,
                                     const State& x1, const DGradParams& params);

} // namespace phsim
