#pragma once

#include <optional>

#include "sfattack/model.hpp"

namespace sfattack {

/// CBF inequality in the control: a + b^T u >= 0, with
/// a = grad h_S(x)^T drift(x) + alpha(h_S(x)) and b = input_matrix(x)^T grad h_S(x).
struct CbfConstraint {
    double a = 0.0;
    ControlVec b;

    double value(const ControlVec& u) const { return a + b.dot(u); }
};

/// Safe controls for a scalar input. Endpoints, when not empty, satisfy the
/// CBF inequality in floating point.
struct SafeControlInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = true;

    bool contains(double u) const { return !empty && lo <= u && u <= hi; }
};

struct FilterResult {
    ControlVec u_act;
    bool constraint_active = false;
    bool infeasible = false;
};

struct DeactivationResult {
    bool deactivated = false;
    std::optional<ControlVec> witness;
};

inline constexpr double kActiveConstraintTol = 1e-10;

CbfConstraint cbf_constraint(const SafeSetSpec& s, const PlantModel& model, const StateVec& x);

bool in_control_box(const SafeSetSpec& s, const ControlVec& u);

/// u in U and the CBF inequality holds at x.
bool safe_control_membership(const SafeSetSpec& s, const PlantModel& model, const StateVec& x,
                             const ControlVec& u);

/// Exact safe-control set for n_u = 1. Throws DimensionError otherwise.
SafeControlInterval safe_control_interval(const SafeSetSpec& s, const PlantModel& model, const StateVec& x);

/// Minimally invasive projection of u_des onto the safe-control set at x.
/// An empty safe set yields the box control of least violation and infeasible = true.
FilterResult asif_filter(const SafeSetSpec& s, const PlantModel& model, const StateVec& x,
                         const ControlVec& u_des);

/// Is there a control deemed safe at xhat that is unsafe at x_true? Exact for
/// n_u = 1; for n_u > 1 the box is sampled with grid_n points per axis.
DeactivationResult check_deactivation(const SafeSetSpec& s, const PlantModel& model,
                                      const StateVec& x_true, const StateVec& xhat, int grid_n = 21);

}  // namespace sfattack
