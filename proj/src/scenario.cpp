#include "sfattack/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sfattack/errors.hpp"

namespace sfattack {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// JSON helpers: every error names the full key path.

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ConfigError(path + ": " + what);
}

std::string join(const std::string& parent, const std::string& key)
{
    return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed)
{
    if (!obj.is_object())
        fail(path.empty() ? "<root>" : path, "expected object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key))
            fail(join(path, key), "unknown key");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& path, const char* type)
{
    if (!obj.contains(key))
        fail(join(path, key), std::string("required key missing (expected ") + type + ")");
    return obj.at(key);
}

double as_number(const json& v, const std::string& path)
{
    if (!v.is_number())
        fail(path, "expected number");
    return v.get<double>();
}

std::uint64_t as_seed(const json& v, const std::string& path)
{
    if (!v.is_number_integer() || v.get<long long>() < 0)
        fail(path, "expected non-negative integer");
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path)
{
    if (!v.is_string())
        fail(path, "expected string");
    return v.get<std::string>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path)
{
    if (v.is_number())
        return Eigen::VectorXd::Constant(1, v.get<double>());
    if (!v.is_array())
        fail(path, "expected array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

Matrix as_matrix(const json& v, const std::string& path)
{
    if (v.is_number())
        return Matrix::Constant(1, 1, v.get<double>());
    if (!v.is_array() || v.empty())
        fail(path, "expected non-empty array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Matrix out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < v.size(); ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        if (!v[r].is_array() || v[r].size() != cols)
            fail(row_path, "expected row of " + std::to_string(cols) + " numbers");
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_number(v[r][c], row_path + "[" + std::to_string(c) + "]");
    }
    return out;
}

Norm as_norm(const json& v, const std::string& path)
{
    const std::string s = as_string(v, path);
    if (s == "l2")
        return Norm::L2;
    if (s == "linf")
        return Norm::Linf;
    fail(path, "expected \"l2\" or \"linf\"");
}

// ---------------------------------------------------------------------------

AttackConfig parse_attack(const json& j, const std::string& path)
{
    reject_unknown(j, path, {"mode", "norm", "delta", "gamma", "seed"});
    AttackConfig a;
    if (j.contains("mode")) {
        const std::string mode = as_string(j["mode"], join(path, "mode"));
        if (mode == "none")
            a.mode = AttackMode::None;
        else if (mode == "random")
            a.mode = AttackMode::Random;
        else if (mode == "gradient")
            a.mode = AttackMode::Gradient;
        else
            fail(join(path, "mode"), "expected \"none\", \"random\" or \"gradient\"");
    }
    if (j.contains("norm"))
        a.norm = as_norm(j["norm"], join(path, "norm"));
    if (j.contains("delta"))
        a.delta = as_number(j["delta"], join(path, "delta"));
    if (j.contains("gamma")) {
        const json& g = j["gamma"];
        if (g.is_null() || (g.is_string() && g.get<std::string>() == "inf"))
            a.gamma = std::numeric_limits<double>::infinity();
        else
            a.gamma = as_number(g, join(path, "gamma"));
    }
    if (j.contains("seed"))
        a.seed = as_seed(j["seed"], join(path, "seed"));
    return a;
}

DetectorConfig parse_detector(const json& j, const std::string& path)
{
    reject_unknown(j, path, {"delta", "norm", "nu", "horizon"});
    DetectorConfig d;
    if (j.contains("delta"))
        d.delta = as_number(j["delta"], join(path, "delta"));
    if (j.contains("norm"))
        d.norm = as_norm(j["norm"], join(path, "norm"));
    if (j.contains("nu"))
        d.nu = as_number(j["nu"], join(path, "nu"));
    if (j.contains("horizon"))
        d.horizon = as_number(j["horizon"], join(path, "horizon"));
    return d;
}

KalmanSpec parse_kalman(const json& j, const std::string& path)
{
    reject_unknown(j, path, {"Q", "R", "K"});
    KalmanSpec k;
    if (j.contains("K")) {
        if (j.contains("Q") || j.contains("R"))
            fail(path, "give either K or {Q, R}, not both");
        k.K = as_matrix(j["K"], join(path, "K"));
    }
    if (j.contains("Q"))
        k.Q = as_matrix(j["Q"], join(path, "Q"));
    if (j.contains("R"))
        k.R = as_matrix(j["R"], join(path, "R"));
    return k;
}

NoiseSpec parse_noise(const json& j, const std::string& path)
{
    reject_unknown(j, path, {"kind", "stddev", "seed"});
    NoiseSpec n;
    if (j.contains("kind")) {
        const std::string kind = as_string(j["kind"], join(path, "kind"));
        if (kind == "none")
            n.kind = NoiseKind::None;
        else if (kind == "gaussian")
            n.kind = NoiseKind::Gaussian;
        else
            fail(join(path, "kind"), "expected \"none\" or \"gaussian\"");
    }
    if (j.contains("stddev"))
        n.stddev = as_number(j["stddev"], join(path, "stddev"));
    if (j.contains("seed"))
        n.seed = as_seed(j["seed"], join(path, "seed"));
    return n;
}

CustomPlant parse_custom(const json& j, const std::string& path)
{
    reject_unknown(j, path,
                   {"A", "B", "C", "safe_set", "alpha_gain", "control_lower", "control_upper", "admissible"});
    CustomPlant c;
    c.A = as_matrix(require(j, "A", path, "matrix"), join(path, "A"));
    c.B = as_matrix(require(j, "B", path, "matrix"), join(path, "B"));
    c.C = as_matrix(require(j, "C", path, "matrix"), join(path, "C"));
    const auto n = c.A.rows();

    const std::string ss_path = join(path, "safe_set");
    const json& ss = require(j, "safe_set", path, "object");
    reject_unknown(ss, ss_path, {"constant", "linear", "quadratic"});
    c.margin_constant = ss.contains("constant") ? as_number(ss["constant"], join(ss_path, "constant")) : 0.0;
    c.margin_linear = ss.contains("linear") ? as_vector(ss["linear"], join(ss_path, "linear"))
                                            : Eigen::VectorXd::Zero(n);
    c.margin_quadratic = ss.contains("quadratic") ? as_matrix(ss["quadratic"], join(ss_path, "quadratic"))
                                                  : Matrix::Zero(n, n);

    c.alpha_gain = j.contains("alpha_gain") ? as_number(j["alpha_gain"], join(path, "alpha_gain")) : 1.0;
    c.control_lower = as_vector(require(j, "control_lower", path, "array"), join(path, "control_lower"));
    c.control_upper = as_vector(require(j, "control_upper", path, "array"), join(path, "control_upper"));

    c.admissible_normals = Matrix::Zero(0, n);
    c.admissible_offsets = Eigen::VectorXd::Zero(0);
    if (j.contains("admissible")) {
        const json& adm = j["admissible"];
        const std::string adm_path = join(path, "admissible");
        if (!adm.is_array())
            fail(adm_path, "expected array of {normal, offset}");
        c.admissible_normals.resize(static_cast<Eigen::Index>(adm.size()), n);
        c.admissible_offsets.resize(static_cast<Eigen::Index>(adm.size()));
        for (std::size_t i = 0; i < adm.size(); ++i) {
            const std::string item = adm_path + "[" + std::to_string(i) + "]";
            reject_unknown(adm[i], item, {"normal", "offset"});
            const Eigen::VectorXd normal = as_vector(require(adm[i], "normal", item, "array"), join(item, "normal"));
            if (normal.size() != n)
                fail(join(item, "normal"), "expected length " + std::to_string(n));
            c.admissible_normals.row(static_cast<Eigen::Index>(i)) = normal.transpose();
            c.admissible_offsets[static_cast<Eigen::Index>(i)] =
                as_number(require(adm[i], "offset", item, "number"), join(item, "offset"));
        }
    }
    return c;
}

ScenarioConfig figure_defaults(const std::string& name)
{
    ScenarioConfig c;
    c.name = name;
    c.scenario = ScenarioKind::DoubleIntegratorFull;
    c.dt = 1e-3;
    c.duration = 3.0;
    c.x0 = StateVec(2);
    c.x0 << -1.75, 0.0;
    c.xhat0 = c.x0;
    c.u_des = ControlVec::Constant(1, 1.0);
    c.u_des_profile = "upper";
    c.attack.mode = AttackMode::Gradient;
    c.attack.norm = Norm::L2;
    c.attack.delta = 1e-3;
    c.detector = DetectorConfig{1e-3, Norm::L2, 0.9, 0.25};
    c.kalman.Q = Matrix::Identity(2, 2);
    return c;
}

ControlVec resolve_profile(const std::string& profile, const ScenarioConfig& cfg, const std::string& path)
{
    const Scenario sc = build_scenario(cfg);
    if (profile == "upper")
        return sc.safe_set.control_upper;
    if (profile == "lower")
        return sc.safe_set.control_lower;
    if (profile == "zero")
        return ControlVec::Zero(sc.model.n_u);
    fail(path, "expected number, array or one of \"upper\", \"lower\", \"zero\"");
}

}  // namespace

std::vector<std::string> builtin_names()
{
    return {"fig2", "fig3-posonly", "fig3-random", "fig4-random", "fig4-gradient"};
}

std::optional<ScenarioConfig> builtin_config(std::string_view name)
{
    ScenarioConfig c = figure_defaults(std::string(name));
    if (name == "fig2" || name == "fig4-gradient")
        return c;
    if (name == "fig3-posonly") {
        c.scenario = ScenarioKind::DoubleIntegratorPosOnly;
        return c;
    }
    if (name == "fig3-random" || name == "fig4-random") {
        c.attack.mode = AttackMode::Random;
        c.attack.seed = name == "fig3-random" ? 3 : 4;
        return c;
    }
    return std::nullopt;
}

ScenarioConfig parse_config(std::string_view json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
    }
    reject_unknown(root, "",
                   {"name", "scenario", "dt", "duration", "x0", "xhat0", "u_des", "attack", "detector", "kalman",
                    "noise", "deactivation_grid", "custom"});

    ScenarioConfig c;
    if (root.contains("name"))
        c.name = as_string(root["name"], "name");

    if (root.contains("scenario")) {
        const std::string kind = as_string(root["scenario"], "scenario");
        if (kind == "double_integrator_full")
            c.scenario = ScenarioKind::DoubleIntegratorFull;
        else if (kind == "double_integrator_position_only")
            c.scenario = ScenarioKind::DoubleIntegratorPosOnly;
        else if (kind == "custom")
            c.scenario = ScenarioKind::Custom;
        else
            fail("scenario", "expected \"double_integrator_full\", \"double_integrator_position_only\" or \"custom\"");
    }
    if (c.scenario == ScenarioKind::Custom)
        c.custom = parse_custom(require(root, "custom", "", "object"), "custom");
    else if (root.contains("custom"))
        fail("custom", "only allowed with scenario \"custom\"");

    c.dt = as_number(require(root, "dt", "", "number"), "dt");
    c.duration = as_number(require(root, "duration", "", "number"), "duration");
    c.x0 = as_vector(require(root, "x0", "", "array"), "x0");

    c.xhat0 = c.x0;
    if (root.contains("xhat0")) {
        const json& xh = root["xhat0"];
        if (!(xh.is_string() && xh.get<std::string>() == "same-as-x0"))
            c.xhat0 = as_vector(xh, "xhat0");
    }

    const json& ud = require(root, "u_des", "", "number, array or profile name");
    if (ud.is_string()) {
        c.u_des_profile = ud.get<std::string>();
        c.u_des = resolve_profile(c.u_des_profile, c, "u_des");
    } else {
        c.u_des = as_vector(ud, "u_des");
    }

    if (root.contains("attack"))
        c.attack = parse_attack(root["attack"], "attack");
    if (root.contains("detector"))
        c.detector = parse_detector(root["detector"], "detector");
    if (root.contains("kalman"))
        c.kalman = parse_kalman(root["kalman"], "kalman");
    if (root.contains("noise"))
        c.noise = parse_noise(root["noise"], "noise");
    if (root.contains("deactivation_grid")) {
        const json& g = root["deactivation_grid"];
        if (!g.is_number_integer())
            fail("deactivation_grid", "expected integer");
        c.deactivation_grid = g.get<int>();
    }

    validate_config(c);
    return c;
}

ScenarioConfig load_config(const std::string& path_or_name)
{
    if (auto builtin = builtin_config(path_or_name))
        return *builtin;

    std::ifstream in(path_or_name);
    if (!in)
        throw ConfigError(path_or_name + ": not a builtin scenario and not a readable file");
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path_or_name + ": " + e.what());
    }
}

void validate_config(const ScenarioConfig& cfg)
{
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        fail("dt", "must be positive");
    if (!(cfg.duration >= cfg.dt) || !std::isfinite(cfg.duration))
        fail("duration", "must be at least dt");
    if (cfg.scenario == ScenarioKind::Custom && !cfg.custom)
        fail("custom", "required for scenario \"custom\"");

    const Scenario sc = build_scenario(cfg);
    const int n_x = sc.model.n_x;
    if (cfg.x0.size() != n_x)
        fail("x0", "expected length " + std::to_string(n_x));
    if (cfg.xhat0.size() != n_x)
        fail("xhat0", "expected length " + std::to_string(n_x));
    if (cfg.u_des.size() != sc.model.n_u)
        fail("u_des", "expected length " + std::to_string(sc.model.n_u));
    if (!cfg.x0.allFinite() || !cfg.xhat0.allFinite() || !cfg.u_des.allFinite())
        fail("x0", "initial states and u_des must be finite");

    if (!(cfg.attack.delta > 0.0))
        fail("attack.delta", "must be positive");
    if (std::isnan(cfg.attack.gamma))
        fail("attack.gamma", "must be a number or \"inf\"");
    if (!(cfg.detector.delta > 0.0))
        fail("detector.delta", "must be positive");
    if (!(cfg.detector.horizon > 0.0))
        fail("detector.horizon", "must be positive");
    if (cfg.noise.kind == NoiseKind::Gaussian && !(cfg.noise.stddev >= 0.0))
        fail("noise.stddev", "must be non-negative");
    if (cfg.deactivation_grid < 2)
        fail("deactivation_grid", "must be at least 2");

    const int n_y = sc.model.n_y;
    if (cfg.kalman.K) {
        if (cfg.kalman.K->rows() != n_x || cfg.kalman.K->cols() != n_y)
            fail("kalman.K", "expected " + std::to_string(n_x) + "x" + std::to_string(n_y));
    } else {
        if (cfg.kalman.Q && (cfg.kalman.Q->rows() != n_x || cfg.kalman.Q->cols() != n_x))
            fail("kalman.Q", "expected " + std::to_string(n_x) + "x" + std::to_string(n_x));
        if (cfg.kalman.R && (cfg.kalman.R->rows() != n_y || cfg.kalman.R->cols() != n_y))
            fail("kalman.R", "expected " + std::to_string(n_y) + "x" + std::to_string(n_y));
    }
}

Scenario build_scenario(const ScenarioConfig& cfg)
{
    switch (cfg.scenario) {
    case ScenarioKind::DoubleIntegratorFull:
        return make_double_integrator_scenario(MeasurementVariant::FullState);
    case ScenarioKind::DoubleIntegratorPosOnly:
        return make_double_integrator_scenario(MeasurementVariant::PositionOnly);
    case ScenarioKind::Custom:
        break;
    }
    if (!cfg.custom)
        fail("custom", "required for scenario \"custom\"");

    const CustomPlant& p = *cfg.custom;
    const auto n = p.A.rows();
    if (p.A.cols() != n)
        fail("custom.A", "must be square");
    if (p.B.rows() != n || p.B.cols() < 1)
        fail("custom.B", "expected " + std::to_string(n) + " rows");
    if (p.C.cols() != n || p.C.rows() < 1)
        fail("custom.C", "expected " + std::to_string(n) + " columns");
    if (p.margin_linear.size() != n)
        fail("custom.safe_set.linear", "expected length " + std::to_string(n));
    if (p.margin_quadratic.rows() != n || p.margin_quadratic.cols() != n)
        fail("custom.safe_set.quadratic", "expected " + std::to_string(n) + "x" + std::to_string(n));
    if (!(p.alpha_gain > 0.0))
        fail("custom.alpha_gain", "must be positive");

    Scenario sc;
    PlantModel& m = sc.model;
    m.n_x = static_cast<int>(n);
    m.n_u = static_cast<int>(p.B.cols());
    m.n_y = static_cast<int>(p.C.rows());
    m.drift = [A = p.A](const StateVec& x) { return StateVec(A * x); };
    m.input_matrix = [B = p.B](const StateVec&) { return B; };
    m.measure = [C = p.C](const StateVec& x) { return MeasVec(C * x); };

    const Matrix H = 0.5 * (p.margin_quadratic + p.margin_quadratic.transpose());
    SafeSetSpec& s = sc.safe_set;
    s.margin = [c0 = p.margin_constant, g = p.margin_linear, H](const StateVec& x) {
        return c0 + g.dot(x) + x.dot(H * x);
    };
    s.gradient = [g = p.margin_linear, H](const StateVec& x) { return StateVec(g + 2.0 * H * x); };
    s.alpha = [k = p.alpha_gain](double v) { return k * v; };
    s.admissible_state = [N = p.admissible_normals, o = p.admissible_offsets](const StateVec& x) {
        return N.rows() == 0 || ((N * x).array() <= o.array()).all();
    };
    s.control_lower = p.control_lower;
    s.control_upper = p.control_upper;
    try {
        validate_safe_set(s, m.n_u);
    } catch (const ConfigError& e) {
        fail("custom", e.what());
    }
    return sc;
}

LinearPlantMatrices linear_matrices(const ScenarioConfig& cfg)
{
    LinearPlantMatrices m;
    if (cfg.scenario == ScenarioKind::Custom) {
        m.A = cfg.custom->A;
        m.C = cfg.custom->C;
    } else {
        m.A = Matrix::Zero(2, 2);
        m.A(0, 1) = 1.0;
        if (cfg.scenario == ScenarioKind::DoubleIntegratorFull) {
            m.C = Matrix::Identity(2, 2);
        } else {
            m.C = Matrix::Zero(1, 2);
            m.C(0, 0) = 1.0;
        }
    }
    m.Q = cfg.kalman.Q.value_or(Matrix::Identity(m.A.rows(), m.A.rows()));
    m.R = cfg.kalman.R.value_or(Matrix(1e-3 * Matrix::Identity(m.C.rows(), m.C.rows())));
    return m;
}

ObserverGain resolve_gain(const ScenarioConfig& cfg)
{
    if (cfg.kalman.K)
        return {*cfg.kalman.K, std::nullopt};
    const LinearPlantMatrices m = linear_matrices(cfg);
    const KalmanGain kg = stationary_kalman_gain(m);
    return {kg.K, care_residual(m, kg.P)};
}

}  // namespace sfattack
