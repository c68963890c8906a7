#include "sfattack/estimator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sfattack/errors.hpp"
#include "sfattack/integrator.hpp"

namespace sfattack {

StateVec observer_rate(const PlantModel& model, const Matrix& gain, const StateVec& xhat,
                       const ControlVec& u, const MeasVec& y)
{
    return eval_dynamics(model, xhat, u) + gain * residual(y, xhat, model);
}

ObserverState observer_step(const ObserverState& obs, const PlantModel& model,
                            const ControlVec& u, const MeasVec& y, double dt)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("observer_step: dt must be positive");
    if (obs.gain.rows() != model.n_x || obs.gain.cols() != model.n_y)
        throw DimensionError("observer gain: expected " + std::to_string(model.n_x) + "x" +
                             std::to_string(model.n_y));
    require_length(y, model.n_y, "y");

    ObserverState next{StateVec(), obs.gain};
    try {
        next.xhat = rk4_step(
            [&](const StateVec& z) { return observer_rate(model, obs.gain, z, u, y); }, obs.xhat, dt);
    } catch (const DivergenceError&) {
        throw DivergenceError("observer_step: estimate diverged");
    }
    return next;
}

MeasVec residual(const MeasVec& y, const StateVec& xhat, const PlantModel& model)
{
    require_length(y, model.n_y, "y");
    return y - eval_measurement(model, xhat);
}

Matrix riccati_rate(const LinearPlantMatrices& m, const Matrix& P)
{
    const Matrix s = m.C.transpose() * m.R.llt().solve(m.C);
    return m.A * P + P * m.A.transpose() - P * s * P + m.Q;
}

double care_residual(const LinearPlantMatrices& m, const Matrix& P)
{
    return riccati_rate(m, P).cwiseAbs().maxCoeff();
}

namespace {

void check_weights(const LinearPlantMatrices& m)
{
    const auto n = m.A.rows();
    if (m.A.cols() != n || m.C.cols() != n || m.Q.rows() != n || m.Q.cols() != n ||
        m.R.rows() != m.C.rows() || m.R.cols() != m.C.rows()) {
        throw DimensionError("stationary_kalman_gain: inconsistent A, C, Q, R dimensions");
    }
    if ((m.Q - m.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
        (m.R - m.R.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("stationary_kalman_gain: Q and R must be symmetric");
    }
    if (n > 0 && Eigen::SelfAdjointEigenSolver<Matrix>(m.Q).eigenvalues().minCoeff() < -1e-12)
        throw std::invalid_argument("stationary_kalman_gain: Q must be positive semidefinite");
    if (m.R.size() > 0 && m.R.llt().info() != Eigen::Success)
        throw std::invalid_argument("stationary_kalman_gain: R must be positive definite");
}

}  // namespace

KalmanGain stationary_kalman_gain(const LinearPlantMatrices& m, double tol, double max_time)
{
    if (!(tol > 0.0))
        throw std::invalid_argument("stationary_kalman_gain: tol must be positive");
    check_weights(m);

    const Matrix s = m.C.transpose() * m.R.llt().solve(m.C);
    const double a_norm = m.A.norm();
    const double s_norm = s.norm();

    // Step bounded so that |h * eig| <= 1 for the linearized Riccati flow,
    // whose spectrum lies within 2 (|A| + |P||S|).
    constexpr double kMaxStep = 0.1;
    auto rate = [&](const Matrix& P) { return Matrix(m.A * P + P * m.A.transpose() - P * s * P + m.Q); };

    Matrix P = m.Q;
    double t = 0.0;
    while (true) {
        const Matrix dP = rate(P);
        if (!dP.allFinite() || !P.allFinite())
            throw DivergenceError("stationary_kalman_gain: Riccati solution diverged (pair not detectable?)");
        if (dP.cwiseAbs().maxCoeff() < tol)
            break;
        if (t >= max_time)
            throw DivergenceError("stationary_kalman_gain: no steady state within max_time = " +
                                  std::to_string(max_time));

        const double h = std::min(kMaxStep, 1.0 / (2.0 * (a_norm + P.norm() * s_norm) + 1e-12));
        const Matrix k1 = dP;
        const Matrix k2 = rate(P + 0.5 * h * k1);
        const Matrix k3 = rate(P + 0.5 * h * k2);
        const Matrix k4 = rate(P + h * k3);
        P += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        P = 0.5 * (P + P.transpose()).eval();
        t += h;
    }

    return {P * m.C.transpose() * m.R.llt().solve(Matrix::Identity(m.R.rows(), m.R.cols())), P};
}

}  // namespace sfattack
