#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sfattack/adversary.hpp"
#include "sfattack/detector.hpp"
#include "sfattack/estimator.hpp"
#include "sfattack/model.hpp"

namespace sfattack {

enum class ScenarioKind { DoubleIntegratorFull, DoubleIntegratorPosOnly, Custom };

/// Linear control-affine plant x' = A x + B u, y = C x with a quadratic margin
/// h_S(x) = c + g^T x + x^T H x, alpha(s) = alpha_gain * s, and X given by
/// half-spaces n_i^T x <= o_i.
struct CustomPlant {
    Matrix A;
    Matrix B;
    Matrix C;
    double margin_constant = 0.0;
    Eigen::VectorXd margin_linear;
    Matrix margin_quadratic;
    double alpha_gain = 1.0;
    ControlVec control_lower;
    ControlVec control_upper;
    Matrix admissible_normals;          // one row per half-space
    Eigen::VectorXd admissible_offsets;
};

struct KalmanSpec {
    std::optional<Matrix> Q;
    std::optional<Matrix> R;
    std::optional<Matrix> K;  // explicit gain overrides Q and R
};

enum class NoiseKind { None, Gaussian };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    double stddev = 0.0;
    std::uint64_t seed = 0;
};

struct ScenarioConfig {
    std::string name = "custom";
    ScenarioKind scenario = ScenarioKind::DoubleIntegratorFull;
    double dt = 1e-3;
    double duration = 3.0;
    StateVec x0;
    StateVec xhat0;                 // resolved; "same-as-x0" copies x0
    ControlVec u_des;               // resolved constant desired control
    std::string u_des_profile = "constant";
    AttackConfig attack;
    DetectorConfig detector;
    KalmanSpec kalman;
    NoiseSpec noise;
    int deactivation_grid = 21;
    std::optional<CustomPlant> custom;
};

/// Names accepted by builtin_config: fig2, fig3-posonly, fig3-random, fig4-random, fig4-gradient.
std::vector<std::string> builtin_names();
std::optional<ScenarioConfig> builtin_config(std::string_view name);

/// Parses a JSON document. Unknown keys and type errors raise ConfigError
/// carrying the key path.
ScenarioConfig parse_config(std::string_view json_text);

/// Builtin name or path to a JSON file.
ScenarioConfig load_config(const std::string& path_or_name);

/// Checks dimensions and ranges against the selected plant. Throws ConfigError.
void validate_config(const ScenarioConfig& cfg);

Scenario build_scenario(const ScenarioConfig& cfg);

/// A, C and the noise weights used for gain synthesis (defaults Q = I, R = 1e-3 I).
LinearPlantMatrices linear_matrices(const ScenarioConfig& cfg);

struct ObserverGain {
    Matrix K;
    std::optional<double> care_residual;  // absent for an explicit gain
};

ObserverGain resolve_gain(const ScenarioConfig& cfg);

}  // namespace sfattack
