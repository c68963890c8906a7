#pragma once

#include <deque>

#include "sfattack/model.hpp"

namespace sfattack {

struct DetectorConfig {
    double delta = 1e-3;   // magnitude threshold on the residual
    Norm norm = Norm::L2;
    double nu = 0.9;       // moving-average alarm threshold
    double horizon = 0.25; // moving-average window length [s]
};

/// Residual exceeds delta (strictly) in the configured norm.
bool magnitude_alarm(const MeasVec& r, const DetectorConfig& cfg);

/// Alignment of the residual-driven estimate correction with ∇h_S:
/// ∇h_S(x̂)^T K (y - h(x̂)) / (delta |K^T ∇h_S(x̂)|). Zero when |K^T ∇h_S| <= 1e-12.
double correlation(const MeasVec& y, const StateVec& xhat, const Matrix& K, const PlantModel& model,
                   const SafeSetSpec& s, const DetectorConfig& cfg);

struct MovingAverage {
    double value = 0.0;
    bool alarm = false;
};

/// Trailing-window trapezoidal average of rho over [t - T, t]. Before a full
/// window has elapsed the average covers [t0, t] and never alarms.
class CorrelationWindow {
public:
    struct Sample {
        double t;
        double rho;
    };

    explicit CorrelationWindow(double horizon);

    /// Throws std::invalid_argument unless t is strictly after the previous sample.
    MovingAverage update(double t, double rho, double nu);

    const std::deque<Sample>& samples() const { return samples_; }
    double horizon() const { return horizon_; }

private:
    double horizon_;
    double start_time_ = 0.0;
    double integral_ = 0.0;  // trapezoid sum over consecutive stored samples
    std::deque<Sample> samples_;
};

/// Appends (t, rho) to the window and thresholds the trailing average at cfg.nu.
MovingAverage ma_update(CorrelationWindow& window, double t, double rho, const DetectorConfig& cfg);

}  // namespace sfattack
