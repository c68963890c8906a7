#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "sfattack/simulation.hpp"

namespace sfattack {

std::vector<std::string> SimulationTrace::column_names() const
{
    std::vector<std::string> cols{"t"};
    auto indexed = [&](const std::string& base, int n) {
        for (int i = 1; i <= n; ++i)
            cols.push_back(base + std::to_string(i));
    };
    indexed("x", n_x);
    indexed("xhat", n_x);
    indexed("y", n_y);
    indexed("y_injected", n_y);
    if (n_u == 1) {
        cols.emplace_back("u_des");
        cols.emplace_back("u_act");
    } else {
        indexed("u_des", n_u);
        indexed("u_act", n_u);
    }
    for (const char* name : {"hS_x", "hS_xhat", "rho", "rho_ma", "alarm_mag", "alarm_corr", "attack_active",
                             "cbf_active", "infeasible", "deactivated"})
        cols.emplace_back(name);
    return cols;
}

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_trace(const SimulationTrace& trace, std::ostream& out)
{
    const auto cols = trace.column_names();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';

    std::string line;
    for (const TraceRow& r : trace.rows) {
        line.clear();
        line += format_double(r.t);
        auto vec = [&](const Eigen::VectorXd& v) {
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                line += ',';
                line += format_double(v[i]);
            }
        };
        auto num = [&](double v) {
            line += ',';
            line += format_double(v);
        };
        auto flag = [&](bool b) { line += b ? ",1" : ",0"; };

        vec(r.x);
        vec(r.xhat);
        vec(r.y);
        vec(r.y_injected);
        vec(r.u_des);
        vec(r.u_act);
        num(r.hS_x);
        num(r.hS_xhat);
        num(r.rho);
        num(r.rho_ma);
        flag(r.alarm_mag);
        flag(r.alarm_corr);
        flag(r.attack_active);
        flag(r.cbf_active);
        flag(r.infeasible);
        flag(r.deactivated);
        out << line << '\n';
    }
}

void write_trace(const SimulationTrace& trace, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error(path + ": cannot open trace file for writing");
    write_trace(trace, out);
    out.flush();
    if (!out)
        throw std::runtime_error(path + ": write failed");
}

}  // namespace sfattack
