#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dqmnav/agent.hpp"
#include "dqmnav/imu_io.hpp"

namespace dqmnav {

// Per-episode training record. step_losses holds one (step index, TD loss)
// pair for every step whose learn() actually ran. The per-action reward
// means make the two reward regimes directly comparable in logs.
struct EpisodeLog {
    int episode = 0;  // 1-based
    double total_reward = 0.0;
    std::vector<std::pair<std::size_t, double>> step_losses;
    std::array<std::int64_t, 2> action_counts = {0, 0};
    double mean_error_adjust = 0.0;
    double mean_reward_adjust = 0.0;
    double mean_reward_no_adjust = 0.0;

    std::size_t steps() const { return static_cast<std::size_t>(action_counts[0] + action_counts[1]); }
    double mean_loss() const;
};

// Runs one pass over the state sequence with a fresh PID memory:
// choose -> transition -> store -> learn per step, states.size() - 1 steps.
// dts must supply at least states.size() - 1 intervals.
EpisodeLog run_episode(Agent& agent, std::span<const Vec6> states,
                       std::span<const double> dts, int episode_index);

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
    int episodes_completed = 0;
    std::uint64_t seed = 0;
    std::string data_fingerprint;  // "fnv1a:<16 hex>" of the training CSV
};

struct Checkpoint {
    int version = kCheckpointVersion;
    Hyperparams hyper;
    QNetwork net;        // eval-network parameters
    OptimizerState opt;  // moments + step counter
    CheckpointMeta meta;
};

using EpisodeCallback = std::function<void(const EpisodeLog&)>;

// Full training run: builds the agent from hyper (validated first), derives
// agent states and intervals from the trajectory, applies the optional
// z-score normalization, and runs hyper.episodes episodes. Episode failures
// are reported with the episode number. on_episode, when set, fires after
// each episode completes.
std::pair<Checkpoint, std::vector<EpisodeLog>> train(const Hyperparams& hyper,
                                                     const Trajectory& traj,
                                                     const std::string& data_fingerprint = "",
                                                     const EpisodeCallback& on_episode = {});

// Continues learning from a checkpoint on a (possibly different) trajectory
// for the given number of episodes. The eval net, optimizer moments, and
// step counter come from the checkpoint; the target net restarts as a copy
// of eval, the sync counter at zero, and the action/sampling stream is
// re-seeded from the checkpoint's seed.
std::vector<EpisodeLog> evaluate(const Checkpoint& ckpt, const Trajectory& traj,
                                 int episodes, const EpisodeCallback& on_episode = {});

Agent agent_from_checkpoint(const Checkpoint& ckpt);

// Checkpoint container: one line of JSON (format tag, version, hyper,
// shapes, optimizer kind/step, meta), then '\n', then a little-endian
// uint64 count followed by that many little-endian float64 values holding
// w1, b1, w2, b2 row-major, then the optimizer's first and second moments
// in the same layout. Loaders reject unknown formats, versions, shapes, and
// truncated payloads with DataError. File writes go through a temp file and
// an atomic rename.
void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
void save_checkpoint_file(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint_file(const std::string& path);

// Writes reward_curve.csv (episode,total_reward,cumulative_reward) and
// loss_curve.csv (episode,step,td_loss) into dir, plus minimal SVG plots of
// both when with_svg is set. Requires at least one log.
void export_curves(std::span<const EpisodeLog> logs, const std::string& dir,
                   bool with_svg = false);

// Config-file (de)serialization of Hyperparams as a JSON object. Accepted
// keys are the canonical snake_case field names plus the ALL_CAPS aliases
// BATCH_SIZE, LR, EPSILON, GAMMA, TARGET_REPLACE_ITER, MEMORY_CAPACITY,
// N_ACTIONS, N_STATES. Unknown keys raise DataError.
Hyperparams hyper_from_json_text(const std::string& text);
std::string hyper_to_json_text(const Hyperparams& hyper);

// FNV-1a 64-bit content fingerprints, formatted "fnv1a:<16 hex digits>".
std::string fingerprint_bytes(const void* data, std::size_t size);
std::string fingerprint_file(const std::string& path);

// In-place per-channel z-score over the whole sequence; standard deviations
// below 1e-12 are floored to keep constant channels finite.
void zscore_normalize(std::vector<Vec6>& states);

}  // namespace dqmnav
