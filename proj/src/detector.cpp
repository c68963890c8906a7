#include "sfattack/detector.hpp"

#include <cmath>
#include <stdexcept>

#include "sfattack/adversary.hpp"

namespace sfattack {

namespace {
// Sample times are k * dt, so window edges that coincide with a sample are matched with slack.
constexpr double kTimeSlack = 1e-9;
}  // namespace

bool magnitude_alarm(const MeasVec& r, const DetectorConfig& cfg)
{
    return norm_of(r, cfg.norm) > cfg.delta;
}

double correlation(const MeasVec& y, const StateVec& xhat, const Matrix& K, const PlantModel& model,
                   const SafeSetSpec& s, const DetectorConfig& cfg)
{
    const MeasVec dir = attack_direction(xhat, K, s);
    const double scale = norm_of(dir, cfg.norm);
    if (scale <= 1e-12)
        return 0.0;
    const MeasVec r = y - eval_measurement(model, xhat);
    return dir.dot(r) / (cfg.delta * scale);
}

CorrelationWindow::CorrelationWindow(double horizon) : horizon_(horizon)
{
    if (!(horizon > 0.0))
        throw std::invalid_argument("CorrelationWindow: horizon must be positive");
}

MovingAverage CorrelationWindow::update(double t, double rho, double nu)
{
    if (samples_.empty()) {
        start_time_ = t;
    } else {
        const Sample& last = samples_.back();
        if (!(t > last.t))
            throw std::invalid_argument("CorrelationWindow: sample times must be strictly increasing");
        integral_ += 0.5 * (t - last.t) * (rho + last.rho);
    }
    samples_.push_back({t, rho});

    const double window_start = std::max(start_time_, t - horizon_);
    while (samples_.size() >= 2 && samples_[1].t <= window_start + kTimeSlack) {
        integral_ -= 0.5 * (samples_[1].t - samples_[0].t) * (samples_[0].rho + samples_[1].rho);
        samples_.pop_front();
    }

    // Remove the part of the first segment that lies before the window.
    double value = integral_;
    const Sample& first = samples_.front();
    if (samples_.size() >= 2 && first.t < window_start - kTimeSlack) {
        const Sample& second = samples_[1];
        const double frac = (window_start - first.t) / (second.t - first.t);
        const double rho_edge = first.rho + frac * (second.rho - first.rho);
        value -= 0.5 * (window_start - first.t) * (first.rho + rho_edge);
    }

    const double span = t - std::max(window_start, first.t);
    MovingAverage out;
    out.value = span > kTimeSlack ? value / span : rho;
    out.alarm = out.value > nu && (t - start_time_) >= horizon_ - kTimeSlack;
    return out;
}

MovingAverage ma_update(CorrelationWindow& window, double t, double rho, const DetectorConfig& cfg)
{
    if (window.horizon() != cfg.horizon)
        throw std::invalid_argument("ma_update: window horizon differs from the detector horizon");
    return window.update(t, rho, cfg.nu);
}

}  // namespace sfattack
