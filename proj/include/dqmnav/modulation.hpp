#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <utility>

#include "dqmnav/types.hpp"

namespace dqmnav {

struct PidGains {
    double kp = 1.0;
    double ki = 0.5;
    double kd = 0.2;
};

// Per-channel PID memory. Starts uninitialized; the first modulate() call
// primes prev and leaves integral and derivative contributions at zero.
struct PidState {
    Vec6 integral = Vec6::Zero();
    Vec6 prev = Vec6::Zero();
    bool initialized = false;
};

// Applies the PID law channel-wise to a raw 6-channel state:
//   adjusted = kp * s + ki * integral' + kd * (s - prev) / dt
// with integral' = integral + s * dt. The first call uses only the
// proportional term (dt is ignored); afterwards dt_s must be > 0 or a
// UsageError is raised. Returns the adjusted state and the updated memory.
std::pair<Vec6, PidState> modulate(const PidState& pid, const PidGains& gains,
                                   const Vec6& state, double dt_s);

// Mean squared error over the 6 channels.
double state_error(const Vec6& a, const Vec6& b);

// Reward shaping families, each a transform of the step loss.
enum class RewardKind {
    InverseProportion,  // 1 / loss
    Sigmoid,            // 1 / (1 + e^loss)
    InverseLog,         // 1 / ln(loss)
    InverseQuadratic,   // 1 / loss^2
    InverseSin,         // 1 / sin(loss)
    InverseCos,         // 1 / cos(loss)
    InverseTan,         // 1 / tan(loss)
};

inline constexpr std::array<RewardKind, 7> kAllRewardKinds = {
    RewardKind::InverseProportion, RewardKind::Sigmoid,     RewardKind::InverseLog,
    RewardKind::InverseQuadratic,  RewardKind::InverseSin,  RewardKind::InverseCos,
    RewardKind::InverseTan,
};

const char* reward_kind_name(RewardKind kind);
std::optional<RewardKind> reward_kind_from_name(std::string_view name);

// Maps a non-negative loss to a finite reward. The loss is clamped into
// [1e-12, 1e6] first; inverse_log additionally keeps it 1e-6 away from 1,
// and the trigonometric kinds clamp it into (0, pi/2 - 1e-6] so every
// denominator stays bounded away from zero. The result is finite for every
// input; all kinds except inverse_log are strictly positive.
double reward(RewardKind kind, double loss);

}  // namespace dqmnav
