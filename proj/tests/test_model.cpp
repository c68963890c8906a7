#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sfattack/errors.hpp"
#include "sfattack/model.hpp"
#include "test_support.hpp"

using namespace sfattack;
using sfattack::testing::uniform;
using sfattack::testing::uniform_vec;
using sfattack::testing::vec;

namespace {

Scenario full() { return make_double_integrator_scenario(MeasurementVariant::FullState); }

}  // namespace

TEST(Dynamics, DoubleIntegratorExamples)
{
    const Scenario sc = full();
    EXPECT_EQ(eval_dynamics(sc.model, vec({-1.75, 0}), vec({1})), vec({0, 1}));
    EXPECT_EQ(eval_dynamics(sc.model, vec({0, 0}), vec({0})), vec({0, 0}));
    EXPECT_EQ(eval_dynamics(sc.model, vec({1, 2}), vec({-1})), vec({2, -1}));
}

TEST(Dynamics, DimensionMismatchNamesArgument)
{
    const Scenario sc = full();
    try {
        eval_dynamics(sc.model, vec({1, 2, 3}), vec({0}));
        FAIL() << "expected DimensionError";
    } catch (const DimensionError& e) {
        EXPECT_NE(std::string(e.what()).find("x"), std::string::npos);
    }
    try {
        eval_dynamics(sc.model, vec({1, 2}), vec({0, 0}));
        FAIL() << "expected DimensionError";
    } catch (const DimensionError& e) {
        EXPECT_NE(std::string(e.what()).find("u"), std::string::npos);
    }
    EXPECT_THROW(eval_measurement(sc.model, vec({1})), DimensionError);
}

TEST(SafetyMargin, Examples)
{
    const Scenario sc = full();
    EXPECT_DOUBLE_EQ(eval_safety_margin(sc.safe_set, vec({-1.75, 0})), 3.5);
    EXPECT_EQ(eval_safety_margin(sc.safe_set, vec({0, 0})), 0.0);
    EXPECT_EQ(eval_safety_margin(sc.safe_set, vec({-0.5, 1})), 0.0);
}

TEST(SafetyGradient, Examples)
{
    const Scenario sc = full();
    EXPECT_EQ(eval_safety_gradient(sc.safe_set, vec({-1.75, 0})), vec({-2, 0}));
    EXPECT_EQ(eval_safety_gradient(sc.safe_set, vec({-0.5, 1})), vec({-2, -2}));
    const StateVec g0 = eval_safety_gradient(sc.safe_set, vec({0, 0}));
    EXPECT_EQ(g0, vec({-2, 0}));
    EXPECT_GT(g0.norm(), 0.0);
}

TEST(GradientCheck, CentralDifferenceAgrees)
{
    const Scenario sc = full();
    EXPECT_LE(check_gradient_fd(sc.safe_set, vec({-1.75, 0}), 1e-5), 1e-6);
    EXPECT_LE(check_gradient_fd(sc.safe_set, vec({3, -2}), 1e-5), 1e-6);
}

TEST(GradientCheck, NonPositiveStepRejected)
{
    const Scenario sc = full();
    EXPECT_THROW(check_gradient_fd(sc.safe_set, vec({0, 0}), 0.0), std::invalid_argument);
    EXPECT_THROW(check_gradient_fd(sc.safe_set, vec({0, 0}), -1e-5), std::invalid_argument);
}

TEST(DoubleIntegrator, MeasurementVariants)
{
    const Scenario f = make_double_integrator_scenario(MeasurementVariant::FullState);
    const Scenario p = make_double_integrator_scenario(MeasurementVariant::PositionOnly);
    EXPECT_EQ(f.model.n_y, 2);
    EXPECT_EQ(eval_measurement(f.model, vec({1, 2})), vec({1, 2}));
    EXPECT_EQ(p.model.n_y, 1);
    EXPECT_EQ(eval_measurement(p.model, vec({1, 2})), vec({1}));
    for (const Scenario* sc : {&f, &p}) {
        EXPECT_FALSE(sc->safe_set.admissible_state(vec({0.1, 0})));
        EXPECT_TRUE(sc->safe_set.admissible_state(vec({0.0, 5})));
        EXPECT_EQ(sc->safe_set.control_lower, vec({-1}));
        EXPECT_EQ(sc->safe_set.control_upper, vec({1}));
        EXPECT_EQ(sc->safe_set.alpha(1.5), 3.0);
    }
}

TEST(SafeSetValidation, RejectsBadAlphaAndBounds)
{
    Scenario sc = full();
    EXPECT_NO_THROW(validate_safe_set(sc.safe_set, 1));

    SafeSetSpec shifted = sc.safe_set;
    shifted.alpha = [](double s) { return s + 1.0; };
    EXPECT_THROW(validate_safe_set(shifted, 1), ConfigError);

    SafeSetSpec decreasing = sc.safe_set;
    decreasing.alpha = [](double s) { return -s; };
    EXPECT_THROW(validate_safe_set(decreasing, 1), ConfigError);

    SafeSetSpec flipped = sc.safe_set;
    flipped.control_lower = vec({1});
    flipped.control_upper = vec({-1});
    EXPECT_THROW(validate_safe_set(flipped, 1), ConfigError);
}

TEST(NormHelpers, DualPairs)
{
    const Eigen::VectorXd v = vec({3, -4});
    EXPECT_DOUBLE_EQ(norm_of(v, Norm::L2), 5.0);
    EXPECT_DOUBLE_EQ(norm_of(v, Norm::Linf), 4.0);
    EXPECT_DOUBLE_EQ(dual_norm_of(v, Norm::L2), 5.0);
    EXPECT_DOUBLE_EQ(dual_norm_of(v, Norm::Linf), 7.0);
}

TEST(ModelProperties, ControlAffinity)
{
    const Scenario sc = full();
    std::mt19937_64 rng(101);
    for (int i = 0; i < 100; ++i) {
        const StateVec x = uniform_vec(rng, 2, -5, 5);
        const ControlVec u1 = uniform_vec(rng, 1, -3, 3);
        const ControlVec u2 = uniform_vec(rng, 1, -3, 3);
        const double theta = uniform(rng, 0, 1);
        const StateVec lhs = eval_dynamics(sc.model, x, theta * u1 + (1 - theta) * u2);
        const StateVec rhs = theta * eval_dynamics(sc.model, x, u1) + (1 - theta) * eval_dynamics(sc.model, x, u2);
        EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ModelProperties, GradientMatchesFiniteDifferences)
{
    const Scenario sc = full();
    std::mt19937_64 rng(102);
    for (int i = 0; i < 100; ++i)
        EXPECT_LE(check_gradient_fd(sc.safe_set, uniform_vec(rng, 2, -5, 5), 1e-5), 1e-6);
}

TEST(ModelProperties, ParabolaIsBoundary)
{
    const Scenario sc = full();
    std::mt19937_64 rng(103);
    for (int i = 0; i < 100; ++i) {
        const double x1 = uniform(rng, -10, 0);
        const StateVec x = vec({x1, std::sqrt(-2 * x1)});
        EXPECT_LE(std::abs(eval_safety_margin(sc.safe_set, x)), 1e-9);
    }
}
