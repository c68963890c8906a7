#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "sfattack/errors.hpp"
#include "sfattack/estimator.hpp"
#include "sfattack/integrator.hpp"
#include "sfattack/safety_filter.hpp"
#include "test_support.hpp"

using namespace sfattack;
using sfattack::testing::vec;

namespace {

// Stabilizing filter CARE solution from the stable invariant subspace of the
// Hamiltonian [[A^T, -C^T R^-1 C], [-Q, -A]].
Matrix hamiltonian_care(const LinearPlantMatrices& m)
{
    const int n = static_cast<int>(m.A.rows());
    Matrix H(2 * n, 2 * n);
    H << m.A.transpose(), -m.C.transpose() * m.R.inverse() * m.C, -m.Q, -m.A;
    Eigen::EigenSolver<Matrix> es(H);
    Eigen::MatrixXcd basis(2 * n, n);
    int k = 0;
    for (int i = 0; i < 2 * n; ++i)
        if (es.eigenvalues()(i).real() < 0)
            basis.col(k++) = es.eigenvectors().col(i);
    EXPECT_EQ(k, n);
    const Eigen::MatrixXcd U1 = basis.topRows(n);
    const Eigen::MatrixXcd U2 = basis.bottomRows(n);
    return (U2 * U1.inverse()).real();
}

LinearPlantMatrices double_integrator(const Matrix& C)
{
    LinearPlantMatrices m;
    m.A = Matrix::Zero(2, 2);
    m.A(0, 1) = 1;
    m.C = C;
    m.Q = Matrix::Identity(2, 2);
    m.R = 1e-3 * Matrix::Identity(C.rows(), C.rows());
    return m;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST(ObserverStep, ZeroInnovationAndDriftKeepsEstimate)
{
    const Scenario sc = make_double_integrator_scenario(MeasurementVariant::FullState);
    const ObserverState obs{vec({-1.2, 0}), Matrix::Identity(2, 2) * 30};
    // x2 = 0 and u = 0 give zero drift; y = h(xhat) stays exact along the step.
    const ObserverState next = observer_step(obs, sc.model, vec({0}), vec({-1.2, 0}), 0.05);
    EXPECT_EQ(next.xhat, obs.xhat);
}

TEST(ObserverStep, ZeroGainFollowsPlantFlow)
{
    const Scenario sc = make_double_integrator_scenario(MeasurementVariant::FullState);
    const ObserverState obs{vec({0, 0}), Matrix::Zero(2, 2)};
    const ObserverState next = observer_step(obs, sc.model, vec({1}), vec({7, 7}), 0.1);
    EXPECT_NEAR(next.xhat(0), 0.005, 1e-15);
    EXPECT_NEAR(next.xhat(1), 0.1, 1e-15);
}

TEST(ObserverStep, RejectsBadStepAndGainShape)
{
    const Scenario sc = make_double_integrator_scenario(MeasurementVariant::FullState);
    const ObserverState obs{vec({0, 0}), Matrix::Zero(2, 2)};
    EXPECT_THROW(observer_step(obs, sc.model, vec({1}), vec({0, 0}), 0.0), std::invalid_argument);
    EXPECT_THROW(observer_step(obs, sc.model, vec({1}), vec({0, 0}), -1e-3), std::invalid_argument);
    const ObserverState wrong{vec({0, 0}), Matrix::Zero(2, 1)};
    EXPECT_THROW(observer_step(wrong, sc.model, vec({1}), vec({0, 0}), 1e-3), DimensionError);
}

TEST(Residual, Examples)
{
    const Scenario f = make_double_integrator_scenario(MeasurementVariant::FullState);
    const Scenario p = make_double_integrator_scenario(MeasurementVariant::PositionOnly);
    EXPECT_EQ(residual(vec({1, 2}), vec({1, 2}), f.model), vec({0, 0}));
    const MeasVec r = residual(vec({1.001, 2}), vec({1, 2}), f.model);
    EXPECT_NEAR(r(0), 0.001, 1e-15);
    EXPECT_EQ(r(1), 0.0);
    EXPECT_NEAR(residual(vec({0.5}), vec({0.4, 9}), p.model)(0), 0.1, 1e-15);
    EXPECT_THROW(residual(vec({0.5, 1}), vec({0.4, 9}), p.model), DimensionError);
}

TEST(KalmanGain, ScalarClosedForm)
{
    const LinearPlantMatrices m{scalar(0), scalar(1), scalar(1), scalar(1e-3)};
    const KalmanGain g = stationary_kalman_gain(m);
    EXPECT_NEAR(g.K(0, 0), std::sqrt(1000.0), 1e-6);
    EXPECT_NEAR(g.P(0, 0), std::sqrt(1e-3), 1e-9);
}

TEST(KalmanGain, ZeroProcessNoiseGivesZeroGain)
{
    const LinearPlantMatrices m{scalar(0), scalar(1), scalar(0), scalar(1)};
    const KalmanGain g = stationary_kalman_gain(m);
    EXPECT_EQ(g.K(0, 0), 0.0);
}

TEST(KalmanGain, DoubleIntegratorBothVariants)
{
    Matrix pos(1, 2);
    pos << 1, 0;
    for (const Matrix& C : {Matrix(Matrix::Identity(2, 2)), pos}) {
        const LinearPlantMatrices m = double_integrator(C);
        const KalmanGain g = stationary_kalman_gain(m);
        EXPECT_LE(care_residual(m, g.P), 1e-8);
        EXPECT_LE((g.P - g.P.transpose()).cwiseAbs().maxCoeff(), 1e-9);
        const Matrix oracle = hamiltonian_care(m);
        EXPECT_LE((g.P - oracle).cwiseAbs().maxCoeff(), 1e-7);
        EXPECT_LE((g.K - g.P * C.transpose() * m.R.inverse()).cwiseAbs().maxCoeff(), 1e-9);
        // Stabilizing: A - K C is Hurwitz.
        const Eigen::VectorXcd eig = (m.A - g.K * C).eigenvalues();
        for (int i = 0; i < eig.size(); ++i)
            EXPECT_LT(eig(i).real(), 0.0);
    }
}

TEST(KalmanGain, FullStateScalarDecouplesToClosedForm)
{
    // A = 0, C = I, Q = I, R = r I decouples into scalar problems p = sqrt(r).
    LinearPlantMatrices m{Matrix::Zero(3, 3), Matrix::Identity(3, 3), Matrix::Identity(3, 3),
                          0.25 * Matrix::Identity(3, 3)};
    const KalmanGain g = stationary_kalman_gain(m);
    EXPECT_LE((g.P - 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(KalmanGain, NonDetectablePairDiverges)
{
    const LinearPlantMatrices m{scalar(1), scalar(0), scalar(1), scalar(1)};
    EXPECT_THROW(stationary_kalman_gain(m), DivergenceError);
}

TEST(KalmanGain, RejectsInvalidWeights)
{
    EXPECT_THROW(stationary_kalman_gain({scalar(0), scalar(1), scalar(-1), scalar(1)}), std::invalid_argument);
    EXPECT_THROW(stationary_kalman_gain({scalar(0), scalar(1), scalar(1), scalar(0)}), std::invalid_argument);
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 0.5;
    EXPECT_THROW(stationary_kalman_gain({Matrix::Zero(2, 2), Matrix::Identity(2, 2), asym,
                                         Matrix::Identity(2, 2)}),
                 std::invalid_argument);
}

TEST(ObserverProperties, TracksExactlyUnderPerfectData)
{
    for (MeasurementVariant variant : {MeasurementVariant::FullState, MeasurementVariant::PositionOnly}) {
        const Scenario sc = make_double_integrator_scenario(variant);
        Matrix C = Matrix::Identity(2, 2);
        if (variant == MeasurementVariant::PositionOnly)
            C = C.topRows(1).eval();
        const Matrix K = stationary_kalman_gain(double_integrator(C)).K;

        // Plant and observer advance together so the sensor is read along the step.
        const double dt = 1e-3;
        Eigen::VectorXd z(4);
        z << -1.75, 0, -1.75, 0;
        double worst = 0;
        for (int k = 0; k < 3000; ++k) {
            const ControlVec u = asif_filter(sc.safe_set, sc.model, z.tail(2), vec({1})).u_act;
            z = rk4_step(
                [&](const Eigen::VectorXd& s) {
                    Eigen::VectorXd rate(4);
                    rate << eval_dynamics(sc.model, s.head(2), u),
                        observer_rate(sc.model, K, s.tail(2), u, eval_measurement(sc.model, s.head(2)));
                    return rate;
                },
                z, dt);
            worst = std::max(worst, (z.tail(2) - z.head(2)).norm());
        }
        EXPECT_LE(worst, 1e-6);
    }
}
