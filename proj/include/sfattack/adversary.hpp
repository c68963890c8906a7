#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "sfattack/model.hpp"

namespace sfattack {

enum class AttackMode { None, Random, Gradient };

struct AttackConfig {
    AttackMode mode = AttackMode::None;
    Norm norm = Norm::L2;      // stealth norm, shared with the magnitude detector
    double delta = 1e-3;       // stealth radius
    double gamma = std::numeric_limits<double>::infinity();  // attack while h_S(x̂) < gamma
    std::uint64_t seed = 0;    // Random mode only
};

struct AttackOutcome {
    MeasVec y_injected;
    bool active = false;
    double offset_norm = 0.0;  // |y_injected - h(x̂)| in the configured norm
};

/// K^T grad h_S(x̂): the sensitivity of the perceived margin rate to the measurement.
MeasVec attack_direction(const StateVec& xhat, const Matrix& K, const SafeSetSpec& s);

/// y = h(x̂) + delta K^T∇h_S / |K^T∇h_S|_2. Throws DegenerateDirectionError when
/// |K^T∇h_S|_2 <= 1e-12 (unless delta = 0).
MeasVec attack_l2(const StateVec& xhat, const Matrix& K, const PlantModel& model, const SafeSetSpec& s,
                  double delta);

/// y = h(x̂) + delta sgn(K^T∇h_S) element-wise, with sgn(0) = 0.
MeasVec attack_linf(const StateVec& xhat, const Matrix& K, const PlantModel& model, const SafeSetSpec& s,
                    double delta);

/// Maximizes ∇h_S(x̂)^T K y over the stealth ball without the closed forms:
/// the linear objective's coefficients are recovered by central differences, then
/// L2 runs projected gradient ascent from h(x̂) and Linf takes coordinate signs.
MeasVec attack_numeric(const StateVec& xhat, const Matrix& K, const PlantModel& model, const SafeSetSpec& s,
                       double delta, Norm norm);

/// y = h(x̂) + delta e / |e|_2 with e ~ N(0, I).
MeasVec attack_random(const StateVec& xhat, const PlantModel& model, double delta, std::mt19937_64& rng);

/// ∇h_S(x̂)^T f(x̂, u) + delta |K^T∇h_S(x̂)|_* (dual norm of `norm`).
double predicted_margin_rate(const StateVec& xhat, const ControlVec& u, const Matrix& K,
                             const PlantModel& model, const SafeSetSpec& s, double delta, Norm norm);

/// Perceived margin rate ∇h_S(x̂)^T (f(x̂, u) + K (y - h(x̂))) under measurement y.
double observed_margin_rate(const StateVec& xhat, const ControlVec& u, const Matrix& K,
                            const PlantModel& model, const SafeSetSpec& s, const MeasVec& y);

/// One iteration of the injection loop: attack while h_S(x̂) < gamma, else pass y_true.
/// A degenerate L2 direction passes y_true through and reports the step as inactive.
AttackOutcome attack_step(const AttackConfig& cfg, const StateVec& xhat, const MeasVec& y_true,
                          const Matrix& K, const PlantModel& model, const SafeSetSpec& s,
                          std::mt19937_64& rng);

/// Owns the seeded generator used by Random mode for one simulation run.
class Adversary {
public:
    explicit Adversary(AttackConfig cfg) : cfg_(cfg), rng_(cfg.seed) {}

    AttackOutcome step(const StateVec& xhat, const MeasVec& y_true, const Matrix& K,
                       const PlantModel& model, const SafeSetSpec& s)
    {
        return attack_step(cfg_, xhat, y_true, K, model, s, rng_);
    }

    const AttackConfig& config() const { return cfg_; }

private:
    AttackConfig cfg_;
    std::mt19937_64 rng_;
};

}  // namespace sfattack
