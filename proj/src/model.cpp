#include "sfattack/model.hpp"

#include <cmath>
#include <string>

#include "sfattack/errors.hpp"

namespace sfattack {

double norm_of(const Eigen::VectorXd& v, Norm norm)
{
    if (v.size() == 0)
        return 0.0;
    return norm == Norm::L2 ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

double dual_norm_of(const Eigen::VectorXd& v, Norm norm)
{
    if (v.size() == 0)
        return 0.0;
    return norm == Norm::L2 ? v.norm() : v.lpNorm<1>();
}

void require_length(const Eigen::VectorXd& v, int expected, const char* what)
{
    if (v.size() != expected) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                             ", got " + std::to_string(v.size()));
    }
}

StateVec eval_dynamics(const PlantModel& model, const StateVec& x, const ControlVec& u)
{
    require_length(x, model.n_x, "x");
    require_length(u, model.n_u, "u");
    StateVec rate = model.drift(x) + model.input_matrix(x) * u;
    require_length(rate, model.n_x, "dynamics output");
    return rate;
}

MeasVec eval_measurement(const PlantModel& model, const StateVec& x)
{
    require_length(x, model.n_x, "x");
    MeasVec y = model.measure(x);
    require_length(y, model.n_y, "measurement output");
    return y;
}

double eval_safety_margin(const SafeSetSpec& s, const StateVec& x)
{
    return s.margin(x);
}

StateVec eval_safety_gradient(const SafeSetSpec& s, const StateVec& x)
{
    return s.gradient(x);
}

double check_gradient_fd(const SafeSetSpec& s, const StateVec& x, double step)
{
    if (!(step > 0.0))
        throw std::invalid_argument("check_gradient_fd: step must be positive");

    const StateVec analytic = s.gradient(x);
    require_length(analytic, static_cast<int>(x.size()), "gradient output");

    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        StateVec up = x;
        StateVec down = x;
        up[i] += step;
        down[i] -= step;
        const double central = (s.margin(up) - s.margin(down)) / (2.0 * step);
        worst = std::max(worst, std::abs(analytic[i] - central));
    }
    return worst;
}

void validate_safe_set(const SafeSetSpec& s, int n_u)
{
    if (!s.margin || !s.gradient || !s.alpha || !s.admissible_state)
        throw ConfigError("safe set: margin, gradient, alpha and admissible_state must all be set");
    if (s.control_lower.size() != n_u || s.control_upper.size() != n_u)
        throw ConfigError("safe set: control bounds must have length n_u = " + std::to_string(n_u));
    for (int i = 0; i < n_u; ++i) {
        if (!(s.control_lower[i] <= s.control_upper[i]))
            throw ConfigError("safe set: control_lower[" + std::to_string(i) + "] exceeds control_upper");
    }

    if (std::abs(s.alpha(0.0)) > 1e-12)
        throw ConfigError("safe set: alpha(0) must be 0");

    // Extended class-K membership can only be sampled.
    constexpr int kGrid = 401;
    constexpr double kSpan = 20.0;
    double prev = s.alpha(-kSpan);
    for (int i = 1; i < kGrid; ++i) {
        const double arg = -kSpan + 2.0 * kSpan * i / (kGrid - 1);
        const double val = s.alpha(arg);
        if (!(val > prev))
            throw ConfigError("safe set: alpha is not strictly increasing near s = " + std::to_string(arg));
        prev = val;
    }
}

Scenario make_double_integrator_scenario(MeasurementVariant variant)
{
    Scenario sc;
    PlantModel& m = sc.model;
    m.n_x = 2;
    m.n_u = 1;
    m.n_y = variant == MeasurementVariant::FullState ? 2 : 1;
    m.drift = [](const StateVec& x) {
        StateVec r(2);
        r << x[1], 0.0;
        return r;
    };
    m.input_matrix = [](const StateVec&) {
        Matrix g(2, 1);
        g << 0.0, 1.0;
        return g;
    };
    if (variant == MeasurementVariant::FullState) {
        m.measure = [](const StateVec& x) { return MeasVec(x); };
    } else {
        m.measure = [](const StateVec& x) {
            MeasVec y(1);
            y << x[0];
            return y;
        };
    }

    SafeSetSpec& s = sc.safe_set;
    s.margin = [](const StateVec& x) { return -2.0 * x[0] - x[1] * x[1]; };
    s.gradient = [](const StateVec& x) {
        StateVec g(2);
        g << -2.0, -2.0 * x[1];
        return g;
    };
    s.alpha = [](double v) { return 2.0 * v; };
    s.admissible_state = [](const StateVec& x) { return x[0] <= 0.0; };
    s.control_lower = ControlVec::Constant(1, -1.0);
    s.control_upper = ControlVec::Constant(1, 1.0);

    validate_safe_set(s, m.n_u);
    return sc;
}

}  // namespace sfattack
