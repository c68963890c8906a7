#include "sfattack/safety_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sfattack/box_qp.hpp"
#include "sfattack/errors.hpp"

namespace sfattack {

CbfConstraint cbf_constraint(const SafeSetSpec& s, const PlantModel& model, const StateVec& x)
{
    require_length(x, model.n_x, "x");
    const StateVec grad = s.gradient(x);
    CbfConstraint c;
    c.a = grad.dot(model.drift(x)) + s.alpha(s.margin(x));
    c.b = model.input_matrix(x).transpose() * grad;
    return c;
}

bool in_control_box(const SafeSetSpec& s, const ControlVec& u)
{
    return (u.array() >= s.control_lower.array()).all() && (u.array() <= s.control_upper.array()).all();
}

bool safe_control_membership(const SafeSetSpec& s, const PlantModel& model, const StateVec& x,
                             const ControlVec& u)
{
    require_length(u, model.n_u, "u");
    return in_control_box(s, u) && cbf_constraint(s, model, x).value(u) >= 0.0;
}

namespace {

SafeControlInterval interval_from(const CbfConstraint& c, double box_lo, double box_hi)
{
    const double b = c.b[0];
    SafeControlInterval out{box_lo, box_hi, false};
    if (b == 0.0) {
        out.empty = !(c.a >= 0.0);
        return out;
    }

    // Move the analytic bound -a/b inward until it satisfies a + b u >= 0 in floating point.
    double bound = -c.a / b;
    const double inward = b > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 8 && c.a + b * bound < 0.0; ++k)
        bound = std::nextafter(bound, inward);

    if (b > 0.0)
        out.lo = std::max(box_lo, bound);
    else
        out.hi = std::min(box_hi, bound);
    out.empty = !(out.lo <= out.hi) || c.a + b * out.lo < 0.0 || c.a + b * out.hi < 0.0;
    return out;
}

ControlVec least_violation(const CbfConstraint& c, const SafeSetSpec& s, const ControlVec& u_des)
{
    ControlVec u = u_des.cwiseMax(s.control_lower).cwiseMin(s.control_upper);
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (c.b[j] > 0.0)
            u[j] = s.control_upper[j];
        else if (c.b[j] < 0.0)
            u[j] = s.control_lower[j];
    }
    return u;
}

// Active-set output may sit a few ulps on the wrong side of the halfspace.
void repair_feasibility(const CbfConstraint& c, const SafeSetSpec& s, ControlVec& u)
{
    for (int pass = 0; pass < 16 && c.value(u) < 0.0; ++pass) {
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < u.size(); ++j) {
            const bool room = c.b[j] > 0.0 ? u[j] < s.control_upper[j] : (c.b[j] < 0.0 && u[j] > s.control_lower[j]);
            if (room && (best < 0 || std::abs(c.b[j]) > std::abs(c.b[best])))
                best = j;
        }
        if (best < 0)
            return;
        const double toward = c.b[best] > 0.0 ? s.control_upper[best] : s.control_lower[best];
        double moved = u[best] - c.value(u) / c.b[best];
        moved = c.b[best] > 0.0 ? std::min(moved, toward) : std::max(moved, toward);
        u[best] = moved == u[best] ? std::nextafter(u[best], toward) : moved;
    }
}

}  // namespace

SafeControlInterval safe_control_interval(const SafeSetSpec& s, const PlantModel& model, const StateVec& x)
{
    if (model.n_u != 1)
        throw DimensionError("safe_control_interval: requires n_u = 1");
    return interval_from(cbf_constraint(s, model, x), s.control_lower[0], s.control_upper[0]);
}

FilterResult asif_filter(const SafeSetSpec& s, const PlantModel& model, const StateVec& x,
                         const ControlVec& u_des)
{
    require_length(u_des, model.n_u, "u_des");
    const CbfConstraint c = cbf_constraint(s, model, x);
    FilterResult r;

    if (in_control_box(s, u_des) && c.value(u_des) >= 0.0) {
        r.u_act = u_des;
    } else if (model.n_u == 1) {
        const SafeControlInterval iv = interval_from(c, s.control_lower[0], s.control_upper[0]);
        if (iv.empty) {
            r.u_act = least_violation(c, s, u_des);
            r.infeasible = true;
        } else {
            r.u_act = ControlVec::Constant(1, std::clamp(u_des[0], iv.lo, iv.hi));
        }
    } else {
        const QpSolution qp = solve_box_halfspace_qp({u_des, s.control_lower, s.control_upper, c.b, c.a});
        r.u_act = qp.u;
        r.infeasible = qp.status == QpStatus::Infeasible;
        if (!r.infeasible)
            repair_feasibility(c, s, r.u_act);
    }

    r.constraint_active = std::abs(c.value(r.u_act)) <= kActiveConstraintTol;
    return r;
}

DeactivationResult check_deactivation(const SafeSetSpec& s, const PlantModel& model,
                                      const StateVec& x_true, const StateVec& xhat, int grid_n)
{
    auto is_witness = [&](const ControlVec& u) {
        return safe_control_membership(s, model, xhat, u) && !safe_control_membership(s, model, x_true, u);
    };

    if (model.n_u == 1) {
        const SafeControlInterval perceived = safe_control_interval(s, model, xhat);
        const SafeControlInterval actual = safe_control_interval(s, model, x_true);
        if (perceived.empty)
            return {};

        // Components of perceived \ actual, each as (open end, closed end).
        std::vector<std::pair<double, double>> parts;
        if (actual.empty) {
            parts.emplace_back(perceived.lo, perceived.hi);
        } else {
            if (perceived.lo < actual.lo)
                parts.emplace_back(std::min(actual.lo, perceived.hi), perceived.lo);
            if (perceived.hi > actual.hi)
                parts.emplace_back(std::max(actual.hi, perceived.lo), perceived.hi);
        }
        for (const auto& [open_end, closed_end] : parts) {
            for (double cand : {0.5 * (open_end + closed_end), closed_end}) {
                ControlVec u = ControlVec::Constant(1, cand);
                if (is_witness(u))
                    return {true, u};
            }
        }
        return {};
    }

    if (grid_n < 2)
        throw std::invalid_argument("check_deactivation: grid_n must be at least 2");

    const int n = model.n_u;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    ControlVec u(n);
    while (true) {
        for (int j = 0; j < n; ++j) {
            const double frac = static_cast<double>(idx[static_cast<std::size_t>(j)]) / (grid_n - 1);
            u[j] = s.control_lower[j] + frac * (s.control_upper[j] - s.control_lower[j]);
        }
        if (is_witness(u))
            return {true, u};
        int j = 0;
        while (j < n && ++idx[static_cast<std::size_t>(j)] == grid_n) {
            idx[static_cast<std::size_t>(j)] = 0;
            ++j;
        }
        if (j == n)
            break;
    }
    return {};
}

}  // namespace sfattack
