#include "sfattack/simulation.hpp"

#include <cmath>
#include <random>

#include "sfattack/integrator.hpp"
#include "sfattack/safety_filter.hpp"

namespace sfattack {

long step_count(double duration, double dt)
{
    return static_cast<long>(std::floor(duration / dt + 1e-9));
}

SimulationTrace run_scenario(const ScenarioConfig& cfg)
{
    validate_config(cfg);
    const Scenario scenario = build_scenario(cfg);
    return run_scenario(cfg, scenario, resolve_gain(cfg).K);
}

SimulationTrace run_scenario(const ScenarioConfig& cfg, const Scenario& scenario, const Matrix& gain)
{
    const PlantModel& model = scenario.model;
    const SafeSetSpec& safe = scenario.safe_set;
    const int n_x = model.n_x;

    SimulationTrace trace;
    trace.n_x = n_x;
    trace.n_u = model.n_u;
    trace.n_y = model.n_y;

    const long steps = step_count(cfg.duration, cfg.dt);
    trace.rows.reserve(static_cast<std::size_t>(steps + 1));

    Adversary adversary(cfg.attack);
    CorrelationWindow window(cfg.detector.horizon);
    std::mt19937_64 noise_rng(cfg.noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    StateVec x = cfg.x0;
    StateVec xhat = cfg.xhat0;

    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;

        MeasVec noise = MeasVec::Zero(model.n_y);
        if (cfg.noise.kind == NoiseKind::Gaussian) {
            for (Eigen::Index i = 0; i < noise.size(); ++i)
                noise[i] = cfg.noise.stddev * gauss(noise_rng);
        }

        TraceRow row;
        row.t = t;
        row.x = x;
        row.xhat = xhat;
        row.y = eval_measurement(model, x) + noise;

        const AttackOutcome attack = adversary.step(xhat, row.y, gain, model, safe);
        row.y_injected = attack.y_injected;
        row.attack_active = attack.active;

        const MeasVec offset = residual(row.y_injected, xhat, model);
        row.alarm_mag = magnitude_alarm(offset, cfg.detector);
        row.rho = correlation(row.y_injected, xhat, gain, model, safe, cfg.detector);
        const MovingAverage ma = ma_update(window, t, row.rho, cfg.detector);
        row.rho_ma = ma.value;
        row.alarm_corr = ma.alarm;

        // The filter only sees the estimate.
        const FilterResult filtered = asif_filter(safe, model, xhat, cfg.u_des);
        row.u_des = cfg.u_des;
        row.u_act = filtered.u_act;
        row.cbf_active = filtered.constraint_active;
        row.infeasible = filtered.infeasible;
        row.deactivated = check_deactivation(safe, model, x, xhat, cfg.deactivation_grid).deactivated;

        row.hS_x = safe.margin(x);
        row.hS_xhat = safe.margin(xhat);
        trace.rows.push_back(std::move(row));

        if (k == steps)
            break;

        const ControlVec& u = filtered.u_act;
        auto closed_loop = [&](const Eigen::VectorXd& z) {
            const StateVec xs = z.head(n_x);
            const StateVec zs = z.tail(n_x);
            const MeasVec expected = eval_measurement(model, zs);
            const MeasVec seen = attack.active ? MeasVec(expected + offset)
                                               : MeasVec(eval_measurement(model, xs) + noise);
            Eigen::VectorXd rate(2 * n_x);
            rate.head(n_x) = eval_dynamics(model, xs, u);
            rate.tail(n_x) = eval_dynamics(model, zs, u) + gain * (seen - expected);
            return rate;
        };

        Eigen::VectorXd z(2 * n_x);
        z << x, xhat;
        try {
            z = rk4_step(closed_loop, z, cfg.dt);
        } catch (const DivergenceError&) {
            throw SimulationDiverged("run_scenario: state diverged after t = " + format_double(t), trace);
        }
        x = z.head(n_x);
        xhat = z.tail(n_x);
    }
    return trace;
}

std::optional<double> first_time(const SimulationTrace& trace, const std::function<bool(const TraceRow&)>& pred)
{
    for (const TraceRow& row : trace.rows) {
        if (pred(row))
            return row.t;
    }
    return std::nullopt;
}

std::optional<double> exit_time(const SimulationTrace& trace)
{
    return first_time(trace, [](const TraceRow& r) { return r.hS_x < 0.0; });
}

std::optional<double> inadmissible_time(const SimulationTrace& trace, const SafeSetSpec& s)
{
    return first_time(trace, [&](const TraceRow& r) { return !s.admissible_state(r.x); });
}

std::optional<double> first_correlation_alarm(const SimulationTrace& trace)
{
    return first_time(trace, [](const TraceRow& r) { return r.alarm_corr; });
}

}  // namespace sfattack
