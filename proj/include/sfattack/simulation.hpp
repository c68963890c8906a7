#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sfattack/errors.hpp"
#include "sfattack/scenario.hpp"

namespace sfattack {

/// Everything observed and decided at one sample time.
struct TraceRow {
    double t = 0.0;
    StateVec x;
    StateVec xhat;
    MeasVec y;
    MeasVec y_injected;
    ControlVec u_des;
    ControlVec u_act;
    double hS_x = 0.0;
    double hS_xhat = 0.0;
    double rho = 0.0;
    double rho_ma = 0.0;
    bool alarm_mag = false;
    bool alarm_corr = false;
    bool attack_active = false;
    bool cbf_active = false;
    bool infeasible = false;
    bool deactivated = false;
};

struct SimulationTrace {
    int n_x = 0;
    int n_u = 0;
    int n_y = 0;
    std::vector<TraceRow> rows;

    /// Header in file order: t, x*, xhat*, y*, y_injected*, u_des, u_act, hS_x, hS_xhat,
    /// rho, rho_ma, alarm_mag, alarm_corr, attack_active, cbf_active, infeasible, deactivated.
    std::vector<std::string> column_names() const;
};

/// Raised when the closed loop produces a non-finite state; holds every row
/// recorded before the failure.
class SimulationDiverged : public DivergenceError {
public:
    SimulationDiverged(const std::string& what, SimulationTrace partial)
        : DivergenceError(what), partial_(std::move(partial))
    {
    }

    const SimulationTrace& partial() const { return partial_; }

private:
    SimulationTrace partial_;
};

/// Number of integration steps: floor(duration / dt), tolerant to roundoff in the ratio.
long step_count(double duration, double dt);

/// Closed loop of sensor, adversary, detector, safety filter, plant and observer.
/// Row k holds the quantities at t = k dt. Plant and observer are advanced together
/// by one RK4 step with u_act held; the true sensor is read along the step, while an
/// active injection holds its offset from h(x̂).
SimulationTrace run_scenario(const ScenarioConfig& cfg);

/// As run_scenario, with an already built plant and gain.
SimulationTrace run_scenario(const ScenarioConfig& cfg, const Scenario& scenario, const Matrix& gain);

std::optional<double> first_time(const SimulationTrace& trace, const std::function<bool(const TraceRow&)>& pred);

/// First t with h_S(x) < 0.
std::optional<double> exit_time(const SimulationTrace& trace);

/// First t with x outside the admissible set.
std::optional<double> inadmissible_time(const SimulationTrace& trace, const SafeSetSpec& s);

/// First t at which the correlation detector alarms.
std::optional<double> first_correlation_alarm(const SimulationTrace& trace);

/// Shortest round-trip decimal rendering.
std::string format_double(double v);

/// CSV with the header from column_names(); booleans as 0/1.
void write_trace(const SimulationTrace& trace, std::ostream& out);

/// Throws std::runtime_error naming the path on I/O failure.
void write_trace(const SimulationTrace& trace, const std::string& path);

}  // namespace sfattack
