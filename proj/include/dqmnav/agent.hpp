#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dqmnav/modulation.hpp"
#include "dqmnav/qnet.hpp"
#include "dqmnav/rng.hpp"
#include "dqmnav/types.hpp"

namespace dqmnav {

// Action 0 feeds the state through the PID modulator; action 1 passes the
// next raw sample through untouched.
enum class Action : int { Adjust = 0, NoAdjust = 1 };

struct Transition {
    Vec6 state = Vec6::Zero();
    Action action = Action::Adjust;
    double reward = 0.0;
    Vec6 next_state = Vec6::Zero();
};

// Fixed-capacity FIFO experience store. Once full, each store() overwrites
// the oldest slot.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void store(const Transition& t);
    // n transitions drawn uniformly with replacement from the occupied
    // slots, or nullopt (consuming no randomness) while size() < n.
    std::optional<std::vector<Transition>> sample(std::size_t n, Rng& rng) const;

    std::size_t size() const { return slots_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_writes() const { return writes_; }
    const Transition& slot(std::size_t i) const { return slots_[i]; }

private:
    std::size_t capacity_;
    std::vector<Transition> slots_;
    std::size_t cursor_ = 0;
    std::uint64_t writes_ = 0;
};

// Full training configuration. Field defaults are the reference
// hyperparameters; the trailing switches are artifact extensions.
struct Hyperparams {
    int batch_size = 32;
    double lr = 0.001;
    double epsilon = 0.9;          // probability of acting greedily
    double gamma = 0.9;
    int target_replace_iter = 100;
    int memory_capacity = 2000;
    int n_actions = kActionDim;    // fixed at 2
    int n_states = kStateDim;      // fixed at 6
    PidGains gains;
    RewardKind reward_kind = RewardKind::Sigmoid;
    int episodes = 20;
    std::uint64_t seed = 0;
    bool learn_after_full = false;   // wait for a full buffer before learning
    OptimizerKind optimizer = OptimizerKind::Adam;
    bool normalize = false;          // per-channel z-score of agent states

    // Throws UsageError on out-of-range values or unsupported dimensions.
    void validate() const;
};

struct StepOutcome {
    Vec6 next_state = Vec6::Zero();
    double reward = 0.0;
    double error = 0.0;    // state MSE driving the reward (1 for NoAdjust)
    PidState pid;
};

// Environment transition at step t of a state sequence. Adjust modulates
// states[t] and scores it against states[t+1]; NoAdjust forwards states[t+1]
// with error and reward fixed at 1 and leaves the PID memory untouched.
// t must address a successor state (UsageError otherwise).
StepOutcome env_step(std::size_t t, Action action, std::span<const Vec6> states,
                     const PidState& pid, const PidGains& gains, double dt_s,
                     RewardKind reward_kind);

// Epsilon-greedy value learner with experience replay and a periodically
// synced target network.
struct Agent {
    explicit Agent(const Hyperparams& hyper);

    // Greedy argmax of the eval net with probability epsilon (ties resolve
    // to Adjust), otherwise a uniformly random action. One uniform draw per
    // call, two when exploring.
    Action choose_action(const Vec6& state);

    // One learning update: sample a batch, bootstrap targets off the target
    // net (y = r + gamma * max Q_target(s')), descend the eval net, count
    // the step. Every target_replace_iter-th call (the first included)
    // copies eval into target before updating. Returns the batch loss, or
    // nullopt (mutating nothing) while the buffer has too few transitions.
    std::optional<double> learn();

    Hyperparams hyper;
    QNetwork eval_net;
    QNetwork target_net;
    OptimizerState opt;
    ReplayBuffer buffer;
    std::uint64_t learn_counter = 0;
    Rng rng;  // action selection + batch sampling stream

private:
    // Per-learn scratch, kept to avoid reallocating every step.
    std::vector<Vec6> batch_states_;
    std::vector<int> batch_actions_;
    std::vector<double> batch_targets_;
};

}  // namespace dqmnav
