#include "sfattack/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "sfattack/adversary.hpp"
#include "sfattack/integrator.hpp"
#include "sfattack/safety_filter.hpp"
#include "sfattack/simulation.hpp"

namespace sfattack {

namespace {

struct Run {
    ScenarioConfig cfg;
    Scenario scenario;
    Matrix gain;
    SimulationTrace trace;
};

class RunCache {
public:
    const Run& get(const std::string& name)
    {
        auto it = runs_.find(name);
        if (it == runs_.end()) {
            Run r;
            r.cfg = *builtin_config(name);
            r.scenario = build_scenario(r.cfg);
            r.gain = resolve_gain(r.cfg).K;
            r.trace = run_scenario(r.cfg, r.scenario, r.gain);
            it = runs_.emplace(name, std::move(r)).first;
        }
        return it->second;
    }

private:
    std::map<std::string, Run> runs_;
};

std::string describe(const std::optional<double>& t)
{
    return t ? format_double(*t) + " s" : std::string("never");
}

double min_over(const SimulationTrace& trace, double TraceRow::*field)
{
    double lo = std::numeric_limits<double>::infinity();
    for (const TraceRow& r : trace.rows)
        lo = std::min(lo, r.*field);
    return lo;
}

CriterionResult fig2_reproduction(RunCache& runs)
{
    const Run& run = runs.get("fig2");
    const double min_perceived = min_over(run.trace, &TraceRow::hS_xhat);
    const auto crossing = inadmissible_time(run.trace, run.scenario.safe_set);
    CriterionResult r{1, "fig2: estimate stays in S while the true state leaves X", false, ""};
    r.passed = min_perceived >= -1e-9 && crossing && *crossing < 3.0;
    r.detail = "min h_S(xhat) = " + format_double(min_perceived) + ", first x1 > 0 at " + describe(crossing);
    return r;
}

CriterionResult fig3_random_safe(RunCache& runs)
{
    const Run& run = runs.get("fig3-random");
    const double min_true = min_over(run.trace, &TraceRow::hS_x);
    return {2, "fig3-random: random injection leaves the filter effective", min_true >= -1e-6,
            "min h_S(x) = " + format_double(min_true)};
}

CriterionResult measurement_ordering(RunCache& runs)
{
    const auto full = exit_time(runs.get("fig2").trace);
    const auto pos = exit_time(runs.get("fig3-posonly").trace);
    const bool ok = full && pos && *full <= 3.0 && *pos <= 3.0 && *full < *pos;
    return {3, "exit from S is earlier with full-state than with position-only measurement", ok,
            "exit(fig2) = " + describe(full) + ", exit(fig3-posonly) = " + describe(pos)};
}

CriterionResult rho_identity(RunCache& runs)
{
    const Run& run = runs.get("fig4-gradient");
    double worst = 0.0;
    std::size_t attacked = 0;
    for (const TraceRow& row : run.trace.rows) {
        if (!row.attack_active)
            continue;
        ++attacked;
        worst = std::max(worst, std::abs(row.rho - 1.0));
    }
    const bool ok = attacked == run.trace.rows.size() && worst <= 1e-9;
    return {4, "fig4-gradient: rho = 1 at every attacked step", ok,
            "attacked rows = " + std::to_string(attacked) + "/" + std::to_string(run.trace.rows.size()) +
                ", max |rho - 1| = " + format_double(worst)};
}

CriterionResult detection_time(RunCache& runs)
{
    const auto grad = first_correlation_alarm(runs.get("fig4-gradient").trace);
    const auto rand = first_correlation_alarm(runs.get("fig4-random").trace);
    const bool ok = grad && *grad >= 0.15 && *grad <= 0.30 && !rand;
    return {5, "correlation alarm (T = 0.25, nu = 0.9) fires in [0.15, 0.30] s only under the gradient attack", ok,
            "gradient: " + describe(grad) + ", random: " + describe(rand)};
}

CriterionResult stealth_everywhere(RunCache& runs)
{
    bool ok = true;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (const char* name : {"fig2", "fig3-random", "fig3-posonly", "fig4-gradient", "fig4-random"}) {
        const Run& run = runs.get(name);
        for (const TraceRow& row : run.trace.rows) {
            const double off = (row.y_injected - run.scenario.model.measure(row.xhat)).norm();
            worst_excess = std::max(worst_excess, off - run.cfg.detector.delta);
            if (row.alarm_mag || off > run.cfg.detector.delta + 1e-12)
                ok = false;
        }
    }
    return {6, "magnitude detector never fires in the attacked scenarios", ok,
            "max (|y_injected - h(xhat)|_2 - delta) = " + format_double(worst_excess)};
}

CriterionResult numeric_oracle(std::mt19937_64& rng)
{
    const Scenario sc = make_double_integrator_scenario(MeasurementVariant::FullState);
    std::uniform_real_distribution<double> state(-5.0, 5.0);
    std::uniform_real_distribution<double> log_delta(std::log(1e-4), std::log(1e-1));
    std::normal_distribution<double> entry(0.0, 10.0);

    double worst_gap = 0.0;
    int sign_mismatch = 0;
    for (int trial = 0; trial < 200; ++trial) {
        StateVec xhat(2);
        xhat << state(rng), state(rng);
        Matrix K(2, 2);
        K << entry(rng), entry(rng), entry(rng), entry(rng);
        const double delta = std::exp(log_delta(rng));
        const StateVec grad = sc.safe_set.gradient(xhat);
        auto objective = [&](const MeasVec& y) { return grad.dot(K * y); };

        const MeasVec l2 = attack_l2(xhat, K, sc.model, sc.safe_set, delta);
        const MeasVec l2_num = attack_numeric(xhat, K, sc.model, sc.safe_set, delta, Norm::L2);
        const MeasVec linf = attack_linf(xhat, K, sc.model, sc.safe_set, delta);
        const MeasVec linf_num = attack_numeric(xhat, K, sc.model, sc.safe_set, delta, Norm::Linf);
        worst_gap = std::max({worst_gap, std::abs(objective(l2) - objective(l2_num)),
                              std::abs(objective(linf) - objective(linf_num))});

        const MeasVec dir = attack_direction(xhat, K, sc.safe_set);
        for (Eigen::Index i = 0; i < dir.size(); ++i) {
            if (std::abs(dir[i]) > 1e-9 && linf[i] != linf_num[i])
                ++sign_mismatch;
        }
    }
    return {7, "closed-form attacks match the numerical maximizer", worst_gap <= 1e-6 && sign_mismatch == 0,
            "max objective gap = " + format_double(worst_gap) +
                ", Linf coordinate mismatches = " + std::to_string(sign_mismatch)};
}

CriterionResult dual_norm_identity(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> state(-5.0, 5.0);
    std::uniform_real_distribution<double> control(-1.0, 1.0);
    constexpr double delta = 1e-3;
    double worst = 0.0;

    for (MeasurementVariant variant : {MeasurementVariant::FullState, MeasurementVariant::PositionOnly}) {
        ScenarioConfig cfg = *builtin_config(variant == MeasurementVariant::FullState ? "fig2" : "fig3-posonly");
        const Scenario sc = build_scenario(cfg);
        const Matrix K = resolve_gain(cfg).K;
        for (int trial = 0; trial < 100; ++trial) {
            StateVec xhat(2);
            xhat << state(rng), state(rng);
            const ControlVec u = ControlVec::Constant(1, control(rng));
            const MeasVec y2 = attack_l2(xhat, K, sc.model, sc.safe_set, delta);
            const MeasVec yinf = attack_linf(xhat, K, sc.model, sc.safe_set, delta);
            worst = std::max(worst, std::abs(observed_margin_rate(xhat, u, K, sc.model, sc.safe_set, y2) -
                                             predicted_margin_rate(xhat, u, K, sc.model, sc.safe_set, delta, Norm::L2)));
            worst = std::max(worst, std::abs(observed_margin_rate(xhat, u, K, sc.model, sc.safe_set, yinf) -
                                             predicted_margin_rate(xhat, u, K, sc.model, sc.safe_set, delta, Norm::Linf)));
        }
    }
    return {8, "perceived margin rate under attack equals drift rate plus delta times the dual norm", worst <= 1e-9,
            "max deviation = " + format_double(worst)};
}

CriterionResult filter_correctness(std::mt19937_64& rng)
{
    ScenarioConfig cfg = *builtin_config("fig2");
    cfg.attack.mode = AttackMode::None;
    const SimulationTrace trace = run_scenario(cfg);
    const double min_true = min_over(trace, &TraceRow::hS_x);

    const Scenario sc = make_double_integrator_scenario(MeasurementVariant::FullState);
    std::uniform_real_distribution<double> state(-5.0, 5.0);
    std::uniform_real_distribution<double> control(-1.0, 1.0);
    int checked = 0;
    int altered = 0;
    for (int trial = 0; trial < 20000 && checked < 1000; ++trial) {
        StateVec x(2);
        x << state(rng), state(rng);
        const ControlVec u = ControlVec::Constant(1, control(rng));
        if (!safe_control_membership(sc.safe_set, sc.model, x, u))
            continue;
        ++checked;
        if (asif_filter(sc.safe_set, sc.model, x, u).u_act[0] != u[0])
            ++altered;
    }

    StateVec corner(2);
    corner << -0.5, 1.0;
    const SafeControlInterval iv = safe_control_interval(sc.safe_set, sc.model, corner);
    const bool point = !iv.empty && iv.lo == -1.0 && iv.hi == -1.0;

    std::ostringstream detail;
    detail << "no-attack min h_S(x) = " << format_double(min_true) << "; safe u_des altered " << altered << "/"
           << checked << "; interval at (-0.5, 1) = " << (iv.empty ? "empty" : "[" + format_double(iv.lo) + ", " +
                                                                              format_double(iv.hi) + "]");
    return {9, "safety filter: invariance, minimal invasiveness, exact safe interval",
            min_true >= -1e-6 && checked == 1000 && altered == 0 && point, detail.str()};
}

CriterionResult estimator_gains()
{
    double worst = 0.0;
    for (const char* name : {"fig2", "fig3-posonly"}) {
        const LinearPlantMatrices m = linear_matrices(*builtin_config(name));
        worst = std::max(worst, care_residual(m, stationary_kalman_gain(m).P));
    }
    LinearPlantMatrices scalar{Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                               Matrix::Constant(1, 1, 1e-3)};
    const double k = stationary_kalman_gain(scalar).K(0, 0);
    const double gap = std::abs(k - std::sqrt(1000.0));
    return {10, "stationary Kalman gain: CARE residual and scalar closed form", worst <= 1e-8 && gap <= 1e-6,
            "max CARE residual = " + format_double(worst) + ", scalar |K - sqrt(1000)| = " + format_double(gap)};
}

CriterionResult gradient_and_rk4(std::mt19937_64& rng)
{
    const Scenario sc = make_double_integrator_scenario(MeasurementVariant::FullState);
    std::uniform_real_distribution<double> state(-5.0, 5.0);
    std::uniform_real_distribution<double> step(1e-4, 0.1);
    double worst_fd = 0.0;
    double worst_rk4 = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        StateVec x(2);
        x << state(rng), state(rng);
        worst_fd = std::max(worst_fd, check_gradient_fd(sc.safe_set, x, 1e-5));

        const double dt = step(rng);
        const StateVec next = rk4_step(
            [](const StateVec& z) {
                StateVec r(2);
                r << z[1], 1.0;
                return r;
            },
            x, dt);
        StateVec exact(2);
        exact << x[0] + x[1] * dt + 0.5 * dt * dt, x[1] + dt;
        worst_rk4 = std::max(worst_rk4, (next - exact).cwiseAbs().maxCoeff());
    }
    return {11, "gradient finite-difference check and RK4 exactness", worst_fd <= 1e-6 && worst_rk4 <= 1e-12,
            "max FD gap = " + format_double(worst_fd) + ", max RK4 error = " + format_double(worst_rk4)};
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite()
{
    RunCache runs;
    std::mt19937_64 rng(20240601);
    std::vector<CriterionResult> out;
    out.push_back(fig2_reproduction(runs));
    out.push_back(fig3_random_safe(runs));
    out.push_back(measurement_ordering(runs));
    out.push_back(rho_identity(runs));
    out.push_back(detection_time(runs));
    out.push_back(stealth_everywhere(runs));
    out.push_back(numeric_oracle(rng));
    out.push_back(dual_norm_identity(rng));
    out.push_back(filter_correctness(rng));
    out.push_back(estimator_gains());
    out.push_back(gradient_and_rk4(rng));
    return out;
}

}  // namespace sfattack
