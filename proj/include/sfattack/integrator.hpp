#pragma once

#include <stdexcept>
#include <utility>

#include "sfattack/errors.hpp"
#include "sfattack/types.hpp"

namespace sfattack {

/// One classical fourth-order Runge-Kutta step of x' = deriv(x).
/// Throws DivergenceError if the result is not finite.
template <typename Deriv>
Eigen::VectorXd rk4_step(Deriv&& deriv, const Eigen::VectorXd& x, double dt)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("rk4_step: dt must be positive");

    const Eigen::VectorXd k1 = deriv(x);
    const Eigen::VectorXd k2 = deriv(Eigen::VectorXd(x + 0.5 * dt * k1));
    const Eigen::VectorXd k3 = deriv(Eigen::VectorXd(x + 0.5 * dt * k2));
    const Eigen::VectorXd k4 = deriv(Eigen::VectorXd(x + dt * k3));
    Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite())
        throw DivergenceError("rk4_step: non-finite state");
    return next;
}

}  // namespace sfattack
