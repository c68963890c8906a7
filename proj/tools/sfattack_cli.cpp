// sfattack: run attack scenarios against a CBF safety filter, print observer
// gains, and run the verification suite.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sfattack/acceptance.hpp"
#include "sfattack/scenario.hpp"
#include "sfattack/simulation.hpp"

namespace {

using namespace sfattack;

std::string when(const std::optional<double>& t)
{
    return t ? format_double(*t) : std::string("none");
}

int cmd_run(const std::string& config, const std::string& out, std::optional<double> dt,
            std::optional<double> duration)
{
    ScenarioConfig cfg = load_config(config);
    if (dt)
        cfg.dt = *dt;
    if (duration)
        cfg.duration = *duration;
    validate_config(cfg);

    const Scenario scenario = build_scenario(cfg);
    const Matrix gain = resolve_gain(cfg).K;
    SimulationTrace trace;
    try {
        trace = run_scenario(cfg, scenario, gain);
    } catch (const SimulationDiverged& e) {
        write_trace(e.partial(), out);
        std::cerr << "error: " << e.what() << " (partial trace written to " << out << ")\n";
        return 2;
    }
    write_trace(trace, out);

    std::cout << "scenario        " << cfg.name << '\n'
              << "rows            " << trace.rows.size() << '\n'
              << "exit_S          " << when(exit_time(trace)) << '\n'
              << "inadmissible    " << when(inadmissible_time(trace, scenario.safe_set)) << '\n'
              << "corr_alarm      " << when(first_correlation_alarm(trace)) << '\n'
              << "trace           " << out << '\n';
    return 0;
}

int cmd_gain(const std::string& config)
{
    const ScenarioConfig cfg = load_config(config);
    const ObserverGain g = resolve_gain(cfg);
    for (Eigen::Index r = 0; r < g.K.rows(); ++r) {
        for (Eigen::Index c = 0; c < g.K.cols(); ++c)
            std::cout << (c ? " " : "") << format_double(g.K(r, c));
        std::cout << '\n';
    }
    std::cout << "care_residual " << (g.care_residual ? format_double(*g.care_residual) : "n/a") << '\n';
    return 0;
}

int cmd_verify()
{
    int failures = 0;
    for (const auto& c : run_acceptance_suite()) {
        std::printf("[%s] %2d  %s\n        %s\n", c.passed ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    c.detail.c_str());
        failures += c.passed ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"False-data injection attacks on CBF safety filters"};
    app.require_subcommand(1);

    std::string run_config;
    std::string run_out;
    std::optional<double> run_dt;
    std::optional<double> run_duration;
    auto* run = app.add_subcommand("run", "Simulate a scenario and write its CSV trace");
    run->add_option("--config", run_config, "Scenario JSON file or builtin name")->required();
    run->add_option("--out", run_out, "Output trace CSV")->required();
    run->add_option("--dt", run_dt, "Override the integration step [s]");
    run->add_option("--duration", run_duration, "Override the simulated duration [s]");

    std::string gain_config;
    auto* gain = app.add_subcommand("gain", "Print the observer gain (row-major) and CARE residual");
    gain->add_option("--config", gain_config, "Scenario JSON file or builtin name")->required();

    auto* verify = app.add_subcommand("verify", "Run the oracle and acceptance checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return cmd_run(run_config, run_out, run_dt, run_duration);
        if (*gain)
            return cmd_gain(gain_config);
        if (*verify)
            return cmd_verify();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
