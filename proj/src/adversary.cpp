#include "sfattack/adversary.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sfattack/errors.hpp"

namespace sfattack {

namespace {

constexpr double kDegenerate = 1e-12;

void require_radius(double delta, const char* who)
{
    if (!(delta >= 0.0) || !std::isfinite(delta))
        throw std::invalid_argument(std::string(who) + ": delta must be a finite non-negative number");
}

double sign_or_zero(double v)
{
    return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
}

}  // namespace

MeasVec attack_direction(const StateVec& xhat, const Matrix& K, const SafeSetSpec& s)
{
    return K.transpose() * s.gradient(xhat);
}

MeasVec attack_l2(const StateVec& xhat, const Matrix& K, const PlantModel& model, const SafeSetSpec& s,
                  double delta)
{
    require_radius(delta, "attack_l2");
    const MeasVec expected = eval_measurement(model, xhat);
    if (delta == 0.0)
        return expected;
    const MeasVec dir = attack_direction(xhat, K, s);
    const double len = dir.norm();
    if (len <= kDegenerate)
        throw DegenerateDirectionError("attack_l2: K^T grad h_S vanishes at the estimate");
    return expected + delta * (dir / len);
}

MeasVec attack_linf(const StateVec& xhat, const Matrix& K, const PlantModel& model, const SafeSetSpec& s,
                    double delta)
{
    require_radius(delta, "attack_linf");
    const MeasVec dir = attack_direction(xhat, K, s);
    return eval_measurement(model, xhat) + delta * dir.unaryExpr(&sign_or_zero);
}

MeasVec attack_numeric(const StateVec& xhat, const Matrix& K, const PlantModel& model, const SafeSetSpec& s,
                       double delta, Norm norm)
{
    require_radius(delta, "attack_numeric");
    const MeasVec center = eval_measurement(model, xhat);
    if (delta == 0.0)
        return center;

    const StateVec grad = s.gradient(xhat);
    auto objective = [&](const MeasVec& y) { return grad.dot(K * y); };

    // The objective is linear, so a unit central difference recovers each coefficient.
    MeasVec coeff(center.size());
    for (Eigen::Index i = 0; i < center.size(); ++i) {
        MeasVec up = center;
        MeasVec down = center;
        up[i] += 1.0;
        down[i] -= 1.0;
        coeff[i] = 0.5 * (objective(up) - objective(down));
    }

    if (norm == Norm::Linf) {
        const double noise = 1e-13 * std::max(1.0, std::abs(objective(center)));
        MeasVec y = center;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (std::abs(coeff[i]) > noise)
                y[i] += delta * sign_or_zero(coeff[i]);
        }
        return y;
    }

    // Projected gradient ascent onto {|y - center|_2 <= delta}, doubling the step
    // while the iterate is still interior.
    auto project = [&](const MeasVec& y) -> MeasVec {
        const MeasVec off = y - center;
        const double len = off.norm();
        return len <= delta ? y : MeasVec(center + off * (delta / len));
    };
    MeasVec y = center;
    double step = 1.0;
    for (int iter = 0; iter < 10000; ++iter) {
        const MeasVec next = project(y + step * coeff);
        const double moved = (next - y).norm();
        y = next;
        if (moved <= 1e-12)
            break;
        if ((y - center).norm() < delta)
            step *= 2.0;
    }
    return y;
}

MeasVec attack_random(const StateVec& xhat, const PlantModel& model, double delta, std::mt19937_64& rng)
{
    require_radius(delta, "attack_random");
    const MeasVec center = eval_measurement(model, xhat);
    std::normal_distribution<double> normal(0.0, 1.0);
    MeasVec e(center.size());
    do {
        for (Eigen::Index i = 0; i < e.size(); ++i)
            e[i] = normal(rng);
    } while (e.size() > 0 && e.norm() < kDegenerate);
    if (e.size() == 0)
        return center;
    return center + delta * (e / e.norm());
}

double predicted_margin_rate(const StateVec& xhat, const ControlVec& u, const Matrix& K,
                             const PlantModel& model, const SafeSetSpec& s, double delta, Norm norm)
{
    const double drift_rate = s.gradient(xhat).dot(eval_dynamics(model, xhat, u));
    return drift_rate + delta * dual_norm_of(attack_direction(xhat, K, s), norm);
}

double observed_margin_rate(const StateVec& xhat, const ControlVec& u, const Matrix& K,
                            const PlantModel& model, const SafeSetSpec& s, const MeasVec& y)
{
    const StateVec rate = eval_dynamics(model, xhat, u) + K * (y - eval_measurement(model, xhat));
    return s.gradient(xhat).dot(rate);
}

AttackOutcome attack_step(const AttackConfig& cfg, const StateVec& xhat, const MeasVec& y_true,
                          const Matrix& K, const PlantModel& model, const SafeSetSpec& s,
                          std::mt19937_64& rng)
{
    require_length(y_true, model.n_y, "y_true");
    const MeasVec expected = eval_measurement(model, xhat);
    auto passthrough = [&] { return AttackOutcome{y_true, false, norm_of(y_true - expected, cfg.norm)}; };

    if (cfg.mode == AttackMode::None || !(s.margin(xhat) < cfg.gamma))
        return passthrough();

    MeasVec y;
    switch (cfg.mode) {
    case AttackMode::Random:
        y = attack_random(xhat, model, cfg.delta, rng);
        break;
    case AttackMode::Gradient:
        if (cfg.norm == Norm::Linf) {
            y = attack_linf(xhat, K, model, s, cfg.delta);
        } else {
            try {
                y = attack_l2(xhat, K, model, s, cfg.delta);
            } catch (const DegenerateDirectionError&) {
                return passthrough();
            }
        }
        break;
    case AttackMode::None:
        break;
    }

    // Rounding in h(x̂) + offset can leave the realized residual a few ulps
    // outside the ball; shrink until the detector's strict test cannot fire.
    MeasVec offset = y - expected;
    const double scale = expected.size() > 0 ? expected.lpNorm<Eigen::Infinity>() + cfg.delta : cfg.delta;
    double shrink = std::numeric_limits<double>::epsilon() * scale / cfg.delta;
    for (int k = 0; k < 16 && norm_of(offset, cfg.norm) > cfg.delta; ++k, shrink *= 2.0) {
        y = expected + offset * (1.0 - shrink);
        offset = y - expected;
    }
    return {y, true, norm_of(offset, cfg.norm)};
}

}  // namespace sfattack
