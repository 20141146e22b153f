#include "dqmnav/modulation.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "dqmnav/errors.hpp"

namespace dqmnav {

namespace {
constexpr double kLossMin = 1e-12;
constexpr double kLossMax = 1e6;
constexpr double kLogGuard = 1e-6;   // keep ln(loss) away from 0
constexpr double kTrigCeil = M_PI / 2.0 - 1e-6;
}  // namespace

std::pair<Vec6, PidState> modulate(const PidState& pid, const PidGains& gains,
                                   const Vec6& state, double dt_s) {
    PidState next;
    Vec6 adjusted;
    if (!pid.initialized) {
        adjusted = gains.kp * state;
    } else {
        if (!(dt_s > 0.0)) throw UsageError("modulate: dt must be > 0");
        next.integral = pid.integral + state * dt_s;
        const Vec6 derivative = (state - pid.prev) / dt_s;
        adjusted = gains.kp * state + gains.ki * next.integral + gains.kd * derivative;
    }
    next.prev = state;
    next.initialized = true;
    return {adjusted, next};
}

double state_error(const Vec6& a, const Vec6& b) {
    return (a - b).squaredNorm() / 6.0;
}

const char* reward_kind_name(RewardKind kind) {
    switch (kind) {
        case RewardKind::InverseProportion: return "inverse_proportion";
        case RewardKind::Sigmoid: return "sigmoid";
        case RewardKind::InverseLog: return "inverse_log";
        case RewardKind::InverseQuadratic: return "inverse_quadratic";
        case RewardKind::InverseSin: return "inverse_sin";
        case RewardKind::InverseCos: return "inverse_cos";
        case RewardKind::InverseTan: return "inverse_tan";
    }
    return "?";
}

std::optional<RewardKind> reward_kind_from_name(std::string_view name) {
    for (RewardKind kind : kAllRewardKinds)
        if (name == reward_kind_name(kind)) return kind;
    return std::nullopt;
}

double reward(RewardKind kind, double loss) {
    if (!(loss >= 0.0)) throw UsageError("reward: loss must be non-negative");
    const double clamped = std::clamp(loss, kLossMin, kLossMax);
    switch (kind) {
        case RewardKind::InverseProportion:
            return 1.0 / clamped;
        case RewardKind::Sigmoid: {
            // e^-x form avoids overflow for large losses; the floor keeps the
            // result strictly positive once e^-x underflows.
            const double e = std::exp(-clamped);
            return std::max(e / (1.0 + e), DBL_MIN);
        }
        case RewardKind::InverseLog: {
            double l = clamped;
            if (std::abs(l - 1.0) < kLogGuard) l = l >= 1.0 ? 1.0 + kLogGuard : 1.0 - kLogGuard;
            return 1.0 / std::log(l);
        }
        case RewardKind::InverseQuadratic:
            return 1.0 / (clamped * clamped);
        case RewardKind::InverseSin:
            return 1.0 / std::sin(std::min(clamped, kTrigCeil));
        case RewardKind::InverseCos:
            return 1.0 / std::cos(std::min(clamped, kTrigCeil));
        case RewardKind::InverseTan:
            return 1.0 / std::tan(std::min(clamped, kTrigCeil));
    }
    throw UsageError("reward: unknown kind");
}

}  // namespace dqmnav
