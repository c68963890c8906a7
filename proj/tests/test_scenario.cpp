#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "sfattack/errors.hpp"
#include "sfattack/scenario.hpp"
#include "test_support.hpp"

using namespace sfattack;
using sfattack::testing::vec;

namespace {

std::string error_of(const std::string& json)
{
    try {
        parse_config(json);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kMinimal = R"({"dt": 0.001, "duration": 1.0, "x0": [-1.75, 0], "u_des": 1})";

}  // namespace

TEST(Builtins, AllNamesLoadAndValidate)
{
    for (const std::string& name : builtin_names()) {
        const auto cfg = builtin_config(name);
        ASSERT_TRUE(cfg.has_value()) << name;
        EXPECT_NO_THROW(validate_config(*cfg)) << name;
        EXPECT_EQ(cfg->x0, vec({-1.75, 0}));
        EXPECT_EQ(cfg->xhat0, cfg->x0);
        EXPECT_EQ(cfg->u_des, vec({1}));
        EXPECT_EQ(cfg->dt, 1e-3);
        EXPECT_EQ(cfg->duration, 3.0);
        EXPECT_EQ(cfg->attack.delta, 1e-3);
        EXPECT_TRUE(std::isinf(cfg->attack.gamma));
        EXPECT_EQ(cfg->noise.kind, NoiseKind::None);
    }
    EXPECT_FALSE(builtin_config("fig5").has_value());
}

TEST(Builtins, FigureSettings)
{
    const ScenarioConfig fig2 = *builtin_config("fig2");
    EXPECT_EQ(fig2.scenario, ScenarioKind::DoubleIntegratorFull);
    EXPECT_EQ(fig2.attack.mode, AttackMode::Gradient);
    EXPECT_EQ(fig2.attack.norm, Norm::L2);

    const ScenarioConfig pos = load_config("fig3-posonly");
    EXPECT_EQ(pos.scenario, ScenarioKind::DoubleIntegratorPosOnly);
    EXPECT_EQ(pos.attack.mode, AttackMode::Gradient);

    EXPECT_EQ(builtin_config("fig3-random")->attack.mode, AttackMode::Random);
    const ScenarioConfig fig4 = *builtin_config("fig4-gradient");
    EXPECT_EQ(fig4.detector.horizon, 0.25);
    EXPECT_EQ(fig4.detector.nu, 0.9);
}

TEST(ParseConfig, MinimalDocumentUsesDefaults)
{
    const ScenarioConfig c = parse_config(kMinimal);
    EXPECT_EQ(c.scenario, ScenarioKind::DoubleIntegratorFull);
    EXPECT_EQ(c.xhat0, c.x0);
    EXPECT_EQ(c.attack.mode, AttackMode::None);
    EXPECT_EQ(c.noise.kind, NoiseKind::None);
}

TEST(ParseConfig, MissingDtIsNamed)
{
    const std::string msg = error_of(R"({"duration": 1.0, "x0": [-1.75, 0], "u_des": 1})");
    EXPECT_EQ(msg.rfind("dt", 0), 0u) << msg;
}

TEST(ParseConfig, UnknownKeysRejectedWithPath)
{
    EXPECT_NE(error_of(R"({"dt": 0.001, "duration": 1, "x0": [0, 0], "u_des": 1, "dtt": 1})").find("dtt"),
              std::string::npos);
    const std::string nested =
        error_of(R"({"dt": 0.001, "duration": 1, "x0": [0, 0], "u_des": 1, "attack": {"radius": 1}})");
    EXPECT_NE(nested.find("attack.radius"), std::string::npos) << nested;
}

TEST(ParseConfig, TypeErrorsNameExpectedType)
{
    const std::string msg = error_of(R"({"dt": "fast", "duration": 1, "x0": [0, 0], "u_des": 1})");
    EXPECT_NE(msg.find("dt"), std::string::npos);
    EXPECT_NE(msg.find("number"), std::string::npos);
    EXPECT_FALSE(error_of("{not json").empty());
    EXPECT_FALSE(error_of(R"({"dt": 0.001, "duration": 1, "x0": [0, 0, 0], "u_des": 1})").empty());
    EXPECT_FALSE(error_of(R"({"dt": -1, "duration": 1, "x0": [0, 0], "u_des": 1})").empty());
}

TEST(ParseConfig, FullDocument)
{
    const ScenarioConfig c = parse_config(R"({
        "name": "trial",
        "scenario": "double_integrator_position_only",
        "dt": 0.002, "duration": 2.0,
        "x0": [-1.0, 0.5], "xhat0": "same-as-x0",
        "u_des": "lower",
        "attack": {"mode": "gradient", "norm": "linf", "delta": 0.01, "gamma": 2.0},
        "detector": {"delta": 0.01, "norm": "linf", "nu": 0.8, "horizon": 0.5},
        "kalman": {"Q": [[1, 0], [0, 2]], "R": [[0.01]]},
        "noise": {"kind": "gaussian", "stddev": 1e-4, "seed": 5},
        "deactivation_grid": 11
    })");
    EXPECT_EQ(c.name, "trial");
    EXPECT_EQ(c.scenario, ScenarioKind::DoubleIntegratorPosOnly);
    EXPECT_EQ(c.xhat0, vec({-1.0, 0.5}));
    EXPECT_EQ(c.u_des, vec({-1}));
    EXPECT_EQ(c.attack.norm, Norm::Linf);
    EXPECT_EQ(c.attack.gamma, 2.0);
    EXPECT_EQ(c.detector.horizon, 0.5);
    EXPECT_EQ(c.noise.kind, NoiseKind::Gaussian);
    EXPECT_EQ(c.noise.seed, 5u);
    EXPECT_EQ(c.deactivation_grid, 11);
    EXPECT_EQ((*c.kalman.Q)(1, 1), 2.0);

    const LinearPlantMatrices m = linear_matrices(c);
    EXPECT_EQ(m.C.rows(), 1);
    EXPECT_EQ(m.R(0, 0), 0.01);
}

TEST(ParseConfig, ExplicitGainSkipsSynthesis)
{
    const ScenarioConfig c = parse_config(
        R"({"dt": 0.001, "duration": 1, "x0": [0, 0], "u_des": 0, "kalman": {"K": [[2, 0], [0, 3]]}})");
    const ObserverGain g = resolve_gain(c);
    EXPECT_EQ(g.K(1, 1), 3.0);
    EXPECT_FALSE(g.care_residual.has_value());
    EXPECT_FALSE(error_of(R"({"dt": 0.001, "duration": 1, "x0": [0, 0], "u_des": 0,
                             "kalman": {"K": [[2, 0]]}})").empty());
}

TEST(ResolveGain, BuiltinGainSolvesRiccati)
{
    for (const char* name : {"fig2", "fig3-posonly"}) {
        const ObserverGain g = resolve_gain(*builtin_config(name));
        ASSERT_TRUE(g.care_residual.has_value());
        EXPECT_LE(*g.care_residual, 1e-8);
    }
    const ObserverGain pos = resolve_gain(*builtin_config("fig3-posonly"));
    EXPECT_EQ(pos.K.rows(), 2);
    EXPECT_EQ(pos.K.cols(), 1);
}

TEST(CustomScenario, LinearPlantWithQuadraticMargin)
{
    // Same plant as the double integrator, written out explicitly.
    const ScenarioConfig c = parse_config(R"({
        "scenario": "custom", "dt": 0.001, "duration": 1, "x0": [-1.75, 0], "u_des": "upper",
        "custom": {
            "A": [[0, 1], [0, 0]], "B": [[0], [1]], "C": [[1, 0], [0, 1]],
            "safe_set": {"constant": 0, "linear": [-2, 0], "quadratic": [[0, 0], [0, -1]]},
            "alpha_gain": 2, "control_lower": [-1], "control_upper": [1],
            "admissible": [{"normal": [1, 0], "offset": 0}]
        }
    })");
    const Scenario custom = build_scenario(c);
    const Scenario builtin = make_double_integrator_scenario(MeasurementVariant::FullState);
    for (const StateVec& x : {vec({-1.75, 0}), vec({-0.5, 1}), vec({0.3, -2})}) {
        EXPECT_DOUBLE_EQ(custom.safe_set.margin(x), builtin.safe_set.margin(x));
        EXPECT_EQ(custom.safe_set.gradient(x), builtin.safe_set.gradient(x));
        EXPECT_EQ(eval_dynamics(custom.model, x, vec({0.4})), eval_dynamics(builtin.model, x, vec({0.4})));
        EXPECT_EQ(custom.safe_set.admissible_state(x), builtin.safe_set.admissible_state(x));
    }
    EXPECT_EQ(custom.safe_set.alpha(1.5), 3.0);
    EXPECT_EQ(c.u_des, vec({1}));
}

TEST(CustomScenario, MissingSectionIsNamed)
{
    const std::string msg = error_of(R"({"scenario": "custom", "dt": 0.001, "duration": 1, "x0": [0], "u_des": 0})");
    EXPECT_NE(msg.find("custom"), std::string::npos) << msg;
}

TEST(LoadConfig, ReadsFilesAndReportsPath)
{
    const std::string path = ::testing::TempDir() + "sfattack_config.json";
    {
        std::ofstream out(path);
        out << kMinimal;
    }
    EXPECT_EQ(load_config(path).duration, 1.0);
    {
        std::ofstream out(path);
        out << R"({"duration": 1})";
    }
    try {
        load_config(path);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("dt"), std::string::npos);
    }
    std::remove(path.c_str());
    EXPECT_THROW(load_config("no-such-scenario"), ConfigError);
}
