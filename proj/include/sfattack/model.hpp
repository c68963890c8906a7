#pragma once

#include <functional>

#include "sfattack/types.hpp"

namespace sfattack {

/// Control-affine plant x' = drift(x) + input_matrix(x) u with measurement y = measure(x).
struct PlantModel {
    int n_x = 0;
    int n_u = 0;
    int n_y = 0;
    std::function<StateVec(const StateVec&)> drift;
    std::function<Matrix(const StateVec&)> input_matrix;  // n_x x n_u
    std::function<MeasVec(const StateVec&)> measure;
};

/// Safe set S = {x : margin(x) >= 0} together with the CBF class-K function
/// and the admissible sets X (membership only) and U (a box).
struct SafeSetSpec {
    std::function<double(const StateVec&)> margin;
    std::function<StateVec(const StateVec&)> gradient;
    std::function<double(double)> alpha;
    std::function<bool(const StateVec&)> admissible_state;
    ControlVec control_lower;
    ControlVec control_upper;

    bool contains(const StateVec& x) const { return margin(x) >= 0.0; }
};

enum class MeasurementVariant { FullState, PositionOnly };

// Throws DimensionError naming `what` when v.size() != expected.
void require_length(const Eigen::VectorXd& v, int expected, const char* what);

StateVec eval_dynamics(const PlantModel& model, const StateVec& x, const ControlVec& u);
MeasVec eval_measurement(const PlantModel& model, const StateVec& x);

double eval_safety_margin(const SafeSetSpec& s, const StateVec& x);
StateVec eval_safety_gradient(const SafeSetSpec& s, const StateVec& x);

/// Largest coordinate gap between the analytic gradient and a central difference
/// with the given step. Throws std::invalid_argument for step <= 0.
double check_gradient_fd(const SafeSetSpec& s, const StateVec& x, double step);

/// Checks alpha(0) = 0, strict monotonicity of alpha on a sample grid and
/// control_lower <= control_upper. Throws ConfigError describing the first violation.
void validate_safe_set(const SafeSetSpec& s, int n_u);

struct Scenario {
    PlantModel model;
    SafeSetSpec safe_set;
};

/// Double integrator x' = (x2, u) with X = {x1 <= 0}, U = [-1, 1],
/// h_S(x) = -2 x1 - x2^2 and alpha(s) = 2 s.
Scenario make_double_integrator_scenario(MeasurementVariant variant);

}  // namespace sfattack
