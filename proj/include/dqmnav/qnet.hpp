#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "dqmnav/types.hpp"

namespace dqmnav {

inline constexpr int kStateDim = 6;
inline constexpr int kHiddenDim = 10;
inline constexpr int kActionDim = 2;

using Vec10 = Eigen::Matrix<double, kHiddenDim, 1>;
using MatW1 = Eigen::Matrix<double, kHiddenDim, kStateDim>;
using MatW2 = Eigen::Matrix<double, kActionDim, kHiddenDim>;

// Fully connected 6 -> 10 (ReLU) -> 2 value network. Gradients reuse the
// same layout: a QNetwork instance per parameter block.
struct QNetwork {
    MatW1 w1 = MatW1::Zero();
    Vec10 b1 = Vec10::Zero();
    MatW2 w2 = MatW2::Zero();
    Vec2 b2 = Vec2::Zero();
};

QNetwork zero_network();

// Weights drawn i.i.d. from N(0, 0.1) in a fixed order (w1 row-major, then
// w2 row-major), biases zero. The same seed reproduces the same network
// bit-for-bit.
QNetwork init_network(std::uint64_t seed);

// Action values for one state.
Vec2 forward(const QNetwork& net, const Vec6& state);

// Mean squared error between the taken-action values and targets,
//   L = (1/B) * sum_i (Q(s_i)[a_i] - y_i)^2,
// together with its exact gradients with respect to every parameter.
// Only the taken action's output row receives gradient. Batch must be
// non-empty with matching lengths and actions in {0, 1} (UsageError).
std::pair<double, QNetwork> loss_and_gradients(const QNetwork& net,
                                               std::span<const Vec6> states,
                                               std::span<const int> actions,
                                               std::span<const double> targets);

enum class OptimizerKind { Adam, Sgd };

// First/second-moment state for the adaptive-moment optimizer plus the step
// counter. The plain gradient-descent mode ignores the moment buffers and
// exists as an ablation switch.
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    QNetwork m;  // first moments
    QNetwork v;  // second moments
};

// Applies one in-place update to net from grads, bias-corrected moments for
// Adam or theta -= lr * g for Sgd, and increments the step counter.
void optimizer_step(OptimizerState& opt, QNetwork& net, const QNetwork& grads);

// target <- source, a full parameter copy (used for target-network syncs).
void copy_into(QNetwork& target, const QNetwork& source);

}  // namespace dqmnav
