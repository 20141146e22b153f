#include "dqmnav/agent.hpp"

#include <cmath>

#include "dqmnav/errors.hpp"

namespace dqmnav {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw UsageError("replay buffer capacity must be >= 1");
    slots_.reserve(capacity_);
}

void ReplayBuffer::store(const Transition& t) {
    if (slots_.size() < capacity_)
        slots_.push_back(t);
    else
        slots_[cursor_] = t;
    cursor_ = (cursor_ + 1) % capacity_;
    ++writes_;
}

std::optional<std::vector<Transition>> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    if (slots_.size() < n) return std::nullopt;
    std::vector<Transition> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.push_back(slots_[rng.uniform_index(slots_.size())]);
    return batch;
}

void Hyperparams::validate() const {
    const auto fail = [](const std::string& msg) { throw UsageError("hyperparams: " + msg); };
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive and finite");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon must be in [0, 1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
    if (target_replace_iter < 1) fail("target_replace_iter must be >= 1");
    if (memory_capacity < 1) fail("memory_capacity must be >= 1");
    if (n_actions != kActionDim) fail("n_actions is fixed at 2");
    if (n_states != kStateDim) fail("n_states is fixed at 6");
    if (episodes < 1) fail("episodes must be >= 1");
    if (!std::isfinite(gains.kp) || !std::isfinite(gains.ki) || !std::isfinite(gains.kd))
        fail("pid gains must be finite");
}

StepOutcome env_step(std::size_t t, Action action, std::span<const Vec6> states,
                     const PidState& pid, const PidGains& gains, double dt_s,
                     RewardKind reward_kind) {
    if (t + 1 >= states.size()) throw UsageError("env_step: t has no successor state");
    StepOutcome out;
    if (action == Action::Adjust) {
        auto [adjusted, next_pid] = modulate(pid, gains, states[t], dt_s);
        out.next_state = adjusted;
        out.error = state_error(adjusted, states[t + 1]);
        out.reward = reward(reward_kind, out.error);
        out.pid = next_pid;
    } else {
        out.next_state = states[t + 1];
        out.error = 1.0;
        out.reward = 1.0;
        out.pid = pid;
    }
    return out;
}

namespace {
const Hyperparams& validated(const Hyperparams& h) {
    h.validate();
    return h;
}
}  // namespace

Agent::Agent(const Hyperparams& h)
    : hyper(validated(h)),
      eval_net(init_network(derive_seed(h.seed, 0))),
      target_net(eval_net),
      buffer(static_cast<std::size_t>(h.memory_capacity)),
      rng(derive_seed(h.seed, 1)) {
    opt.kind = hyper.optimizer;
    opt.lr = hyper.lr;
    batch_states_.reserve(static_cast<std::size_t>(hyper.batch_size));
    batch_actions_.reserve(static_cast<std::size_t>(hyper.batch_size));
    batch_targets_.reserve(static_cast<std::size_t>(hyper.batch_size));
}

Action Agent::choose_action(const Vec6& state) {
    if (rng.uniform() < hyper.epsilon) {
        const Vec2 q = forward(eval_net, state);
        return q[1] > q[0] ? Action::NoAdjust : Action::Adjust;  // tie -> lowest index
    }
    return rng.uniform_index(2) == 0 ? Action::Adjust : Action::NoAdjust;
}

std::optional<double> Agent::learn() {
    const auto need = static_cast<std::size_t>(
        hyper.learn_after_full ? hyper.memory_capacity : hyper.batch_size);
    if (buffer.size() < need) return std::nullopt;

    auto batch = buffer.sample(static_cast<std::size_t>(hyper.batch_size), rng);
    if (!batch) return std::nullopt;

    if (learn_counter % static_cast<std::uint64_t>(hyper.target_replace_iter) == 0)
        copy_into(target_net, eval_net);

    batch_states_.clear();
    batch_actions_.clear();
    batch_targets_.clear();
    for (const Transition& tr : *batch) {
        batch_states_.push_back(tr.state);
        batch_actions_.push_back(static_cast<int>(tr.action));
        batch_targets_.push_back(tr.reward +
                                 hyper.gamma * forward(target_net, tr.next_state).maxCoeff());
    }

    const auto [loss, grads] =
        loss_and_gradients(eval_net, batch_states_, batch_actions_, batch_targets_);
    optimizer_step(opt, eval_net, grads);
    ++learn_counter;
    return loss;
}

}  // namespace dqmnav
