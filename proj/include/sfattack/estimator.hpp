#pragma once

#include "sfattack/model.hpp"

namespace sfattack {

/// Observer x̂' = f(x̂, u) + K (y - h(x̂)) with a constant gain K (n_x x n_y).
struct ObserverState {
    StateVec xhat;
    Matrix gain;
};

/// Linearization used for gain synthesis: x' = A x + ..., y = C x, with
/// process weight Q (symmetric PSD) and measurement weight R (symmetric PD).
struct LinearPlantMatrices {
    Matrix A;
    Matrix C;
    Matrix Q;
    Matrix R;
};

struct KalmanGain {
    Matrix K;
    Matrix P;
};

/// Advances the observer by one RK4 step with u and y held constant.
/// Throws std::invalid_argument for dt <= 0 and DivergenceError on a non-finite estimate.
ObserverState observer_step(const ObserverState& obs, const PlantModel& model,
                            const ControlVec& u, const MeasVec& y, double dt);

/// Observer right-hand side at an arbitrary estimate.
StateVec observer_rate(const PlantModel& model, const Matrix& gain, const StateVec& xhat,
                       const ControlVec& u, const MeasVec& y);

/// y - h(x̂).
MeasVec residual(const MeasVec& y, const StateVec& xhat, const PlantModel& model);

/// Right-hand side of the filter Riccati equation AP + PA^T - P C^T R^-1 C P + Q.
Matrix riccati_rate(const LinearPlantMatrices& m, const Matrix& P);

/// Stationary Kalman gain K = P C^T R^-1, with P found by integrating the
/// Riccati differential equation from P(0) = Q until max|P'| < tol.
/// Throws DivergenceError when no steady state is reached within max_time.
KalmanGain stationary_kalman_gain(const LinearPlantMatrices& m, double tol = 1e-10,
                                  double max_time = 1e4);

/// max-abs entry of the algebraic Riccati residual at P.
double care_residual(const LinearPlantMatrices& m, const Matrix& P);

}  // namespace sfattack
