#include "dqmnav/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dqmnav/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dqmnav {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written in native little-endian order");

namespace {

constexpr const char* kCheckpointFormat = "dqmnav-checkpoint";
constexpr std::size_t kParamsPerNet = 92;   // 10*6 + 10 + 2*10 + 2
constexpr std::size_t kPayloadCount = 3 * kParamsPerNet;  // params + m + v

void append_params(const QNetwork& net, std::vector<double>& out) {
    for (int r = 0; r < kHiddenDim; ++r)
        for (int c = 0; c < kStateDim; ++c) out.push_back(net.w1(r, c));
    for (int r = 0; r < kHiddenDim; ++r) out.push_back(net.b1[r]);
    for (int r = 0; r < kActionDim; ++r)
        for (int c = 0; c < kHiddenDim; ++c) out.push_back(net.w2(r, c));
    for (int r = 0; r < kActionDim; ++r) out.push_back(net.b2[r]);
}

const double* read_params(QNetwork& net, const double* p) {
    for (int r = 0; r < kHiddenDim; ++r)
        for (int c = 0; c < kStateDim; ++c) net.w1(r, c) = *p++;
    for (int r = 0; r < kHiddenDim; ++r) net.b1[r] = *p++;
    for (int r = 0; r < kActionDim; ++r)
        for (int c = 0; c < kHiddenDim; ++c) net.w2(r, c) = *p++;
    for (int r = 0; r < kActionDim; ++r) net.b2[r] = *p++;
    return p;
}

const char* optimizer_kind_name(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind optimizer_kind_from_name(const std::string& name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "sgd") return OptimizerKind::Sgd;
    throw DataError("unknown optimizer '" + name + "'; valid: adam, sgd");
}

json hyper_to_json(const Hyperparams& h) {
    return json{{"batch_size", h.batch_size},
                {"lr", h.lr},
                {"epsilon", h.epsilon},
                {"gamma", h.gamma},
                {"target_replace_iter", h.target_replace_iter},
                {"memory_capacity", h.memory_capacity},
                {"n_actions", h.n_actions},
                {"n_states", h.n_states},
                {"kp", h.gains.kp},
                {"ki", h.gains.ki},
                {"kd", h.gains.kd},
                {"reward_kind", reward_kind_name(h.reward_kind)},
                {"episodes", h.episodes},
                {"seed", h.seed},
                {"learn_after_full", h.learn_after_full},
                {"optimizer", optimizer_kind_name(h.optimizer)},
                {"normalize", h.normalize}};
}

template <typename T>
T get_as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw DataError("config key '" + key + "' has the wrong type");
    }
}

Hyperparams hyper_from_json(const json& j) {
    if (!j.is_object()) throw DataError("config must be a JSON object");
    Hyperparams h;
    for (const auto& [key, value] : j.items()) {
        if (key == "batch_size" || key == "BATCH_SIZE")
            h.batch_size = get_as<int>(value, key);
        else if (key == "lr" || key == "LR")
            h.lr = get_as<double>(value, key);
        else if (key == "epsilon" || key == "EPSILON")
            h.epsilon = get_as<double>(value, key);
        else if (key == "gamma" || key == "GAMMA")
            h.gamma = get_as<double>(value, key);
        else if (key == "target_replace_iter" || key == "TARGET_REPLACE_ITER")
            h.target_replace_iter = get_as<int>(value, key);
        else if (key == "memory_capacity" || key == "MEMORY_CAPACITY")
            h.memory_capacity = get_as<int>(value, key);
        else if (key == "n_actions" || key == "N_ACTIONS")
            h.n_actions = get_as<int>(value, key);
        else if (key == "n_states" || key == "N_STATES")
            h.n_states = get_as<int>(value, key);
        else if (key == "kp")
            h.gains.kp = get_as<double>(value, key);
        else if (key == "ki")
            h.gains.ki = get_as<double>(value, key);
        else if (key == "kd")
            h.gains.kd = get_as<double>(value, key);
        else if (key == "reward_kind") {
            const auto name = get_as<std::string>(value, key);
            const auto kind = reward_kind_from_name(name);
            if (!kind)
                throw DataError("unknown reward_kind '" + name +
                                "'; valid: inverse_proportion, sigmoid, inverse_log, "
                                "inverse_quadratic, inverse_sin, inverse_cos, inverse_tan");
            h.reward_kind = *kind;
        } else if (key == "episodes")
            h.episodes = get_as<int>(value, key);
        else if (key == "seed")
            h.seed = get_as<std::uint64_t>(value, key);
        else if (key == "learn_after_full")
            h.learn_after_full = get_as<bool>(value, key);
        else if (key == "optimizer")
            h.optimizer = optimizer_kind_from_name(get_as<std::string>(value, key));
        else if (key == "normalize")
            h.normalize = get_as<bool>(value, key);
        else
            throw DataError("unknown config key '" + key + "'");
    }
    return h;
}

void check_shape(const json& shapes, const char* name, std::vector<int> expect) {
    if (!shapes.contains(name) || shapes.at(name).get<std::vector<int>>() != expect)
        throw DataError(std::string("checkpoint shape mismatch for ") + name);
}

// Minimal standalone line plot, one polyline over auto-scaled axes.
void write_svg_curve(const std::string& path, const std::vector<double>& xs,
                     const std::vector<double>& ys, const std::string& title) {
    if (xs.empty()) return;
    const double xmin = *std::min_element(xs.begin(), xs.end());
    const double xmax = *std::max_element(xs.begin(), xs.end());
    const double ymin = *std::min_element(ys.begin(), ys.end());
    const double ymax = *std::max_element(ys.begin(), ys.end());
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    const double yspan = ymax > ymin ? ymax - ymin : 1.0;
    const double w = 640.0, hgt = 400.0, pad = 48.0;

    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='640' height='400' "
           "viewBox='0 0 640 400'>\n"
        << "<rect width='640' height='400' fill='white'/>\n"
        << "<text x='16' y='24' font-family='monospace' font-size='14'>" << title << "</text>\n"
        << "<line x1='48' y1='352' x2='592' y2='352' stroke='black'/>\n"
        << "<line x1='48' y1='352' x2='48' y2='48' stroke='black'/>\n"
        << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
    char buf[64];
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = pad + (xs[i] - xmin) / xspan * (w - 2 * pad);
        const double py = hgt - pad - (ys[i] - ymin) / yspan * (hgt - 2 * pad);
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
        out << buf;
    }
    out << "'/>\n";
    std::snprintf(buf, sizeof buf, "%.6g", ymin);
    out << "<text x='8' y='356' font-family='monospace' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", ymax);
    out << "<text x='8' y='52' font-family='monospace' font-size='11'>" << buf << "</text>\n";
    out << "</svg>\n";
    if (!out) throw DataError("write failed: " + path);
}

template <typename Fn>
auto with_episode_context(int episode, Fn&& fn) {
    try {
        return fn();
    } catch (const UsageError& e) {
        throw UsageError("episode " + std::to_string(episode) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("episode " + std::to_string(episode) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("episode " + std::to_string(episode) + ": " + e.what());
    }
}

}  // namespace

double EpisodeLog::mean_loss() const {
    if (step_losses.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [step, loss] : step_losses) sum += loss;
    return sum / static_cast<double>(step_losses.size());
}

EpisodeLog run_episode(Agent& agent, std::span<const Vec6> states,
                       std::span<const double> dts, int episode_index) {
    if (states.size() < 2) throw UsageError("run_episode: need at least 2 states");
    if (dts.size() + 1 < states.size())
        throw UsageError("run_episode: fewer intervals than steps");

    EpisodeLog log;
    log.episode = episode_index;
    PidState pid;
    double err_sum = 0.0, r_adjust_sum = 0.0, r_pass_sum = 0.0;

    for (std::size_t t = 0; t + 1 < states.size(); ++t) {
        const Action action = agent.choose_action(states[t]);
        const StepOutcome out = env_step(t, action, states, pid, agent.hyper.gains, dts[t],
                                         agent.hyper.reward_kind);
        pid = out.pid;
        agent.buffer.store(Transition{states[t], action, out.reward, out.next_state});
        if (const auto loss = agent.learn()) log.step_losses.emplace_back(t, *loss);

        log.total_reward += out.reward;
        ++log.action_counts[static_cast<int>(action)];
        if (action == Action::Adjust) {
            err_sum += out.error;
            r_adjust_sum += out.reward;
        } else {
            r_pass_sum += out.reward;
        }
    }
    if (log.action_counts[0] > 0) {
        log.mean_error_adjust = err_sum / static_cast<double>(log.action_counts[0]);
        log.mean_reward_adjust = r_adjust_sum / static_cast<double>(log.action_counts[0]);
    }
    if (log.action_counts[1] > 0)
        log.mean_reward_no_adjust = r_pass_sum / static_cast<double>(log.action_counts[1]);
    return log;
}

std::pair<Checkpoint, std::vector<EpisodeLog>> train(const Hyperparams& hyper,
                                                     const Trajectory& traj,
                                                     const std::string& data_fingerprint,
                                                     const EpisodeCallback& on_episode) {
    hyper.validate();
    if (traj.samples.size() < 2) throw DataError("train: trajectory needs at least 2 samples");
    auto states = to_agent_states(traj);
    if (hyper.normalize) zscore_normalize(states);
    const auto dts = sample_intervals_s(traj);

    Agent agent(hyper);
    std::vector<EpisodeLog> logs;
    logs.reserve(static_cast<std::size_t>(hyper.episodes));
    for (int e = 1; e <= hyper.episodes; ++e) {
        logs.push_back(
            with_episode_context(e, [&] { return run_episode(agent, states, dts, e); }));
        if (on_episode) on_episode(logs.back());
    }

    Checkpoint ckpt;
    ckpt.hyper = hyper;
    ckpt.net = agent.eval_net;
    ckpt.opt = agent.opt;
    ckpt.meta = CheckpointMeta{hyper.episodes, hyper.seed, data_fingerprint};
    return {std::move(ckpt), std::move(logs)};
}

Agent agent_from_checkpoint(const Checkpoint& ckpt) {
    Agent agent(ckpt.hyper);
    agent.eval_net = ckpt.net;
    agent.target_net = ckpt.net;
    agent.opt = ckpt.opt;
    agent.learn_counter = 0;
    return agent;
}

std::vector<EpisodeLog> evaluate(const Checkpoint& ckpt, const Trajectory& traj,
                                 int episodes, const EpisodeCallback& on_episode) {
    if (episodes < 1) throw UsageError("evaluate: episodes must be >= 1");
    if (traj.samples.size() < 2)
        throw DataError("evaluate: trajectory needs at least 2 samples");
    auto states = to_agent_states(traj);
    if (ckpt.hyper.normalize) zscore_normalize(states);
    const auto dts = sample_intervals_s(traj);

    Agent agent = agent_from_checkpoint(ckpt);
    std::vector<EpisodeLog> logs;
    logs.reserve(static_cast<std::size_t>(episodes));
    for (int e = 1; e <= episodes; ++e) {
        logs.push_back(
            with_episode_context(e, [&] { return run_episode(agent, states, dts, e); }));
        if (on_episode) on_episode(logs.back());
    }
    return logs;
}

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
    json header{{"format", kCheckpointFormat},
                {"version", ckpt.version},
                {"hyper", hyper_to_json(ckpt.hyper)},
                {"shapes",
                 {{"w1", {kHiddenDim, kStateDim}},
                  {"b1", {kHiddenDim}},
                  {"w2", {kActionDim, kHiddenDim}},
                  {"b2", {kActionDim}}}},
                {"optimizer",
                 {{"kind", optimizer_kind_name(ckpt.opt.kind)}, {"step", ckpt.opt.step}}},
                {"meta",
                 {{"episodes_completed", ckpt.meta.episodes_completed},
                  {"seed", ckpt.meta.seed},
                  {"data_fingerprint", ckpt.meta.data_fingerprint}}}};
    out << header.dump() << '\n';

    std::vector<double> payload;
    payload.reserve(kPayloadCount);
    append_params(ckpt.net, payload);
    append_params(ckpt.opt.m, payload);
    append_params(ckpt.opt.v, payload);

    const std::uint64_t count = payload.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!out) throw DataError("checkpoint write failed");
}

void save_checkpoint_file(const Checkpoint& ckpt, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot open for writing: " + tmp);
        save_checkpoint(ckpt, out);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("checkpoint: empty or unreadable header");
    const json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object() || !header.contains("format") ||
        header.at("format") != kCheckpointFormat)
        throw DataError("checkpoint: not a dqmnav checkpoint");
    const int version = header.value("version", -1);
    if (version != kCheckpointVersion)
        throw DataError("checkpoint: unsupported version " + std::to_string(version) +
                        " (expected " + std::to_string(kCheckpointVersion) + ")");
    if (!header.contains("hyper") || !header.contains("shapes") || !header.contains("meta") ||
        !header.contains("optimizer"))
        throw DataError("checkpoint: missing header section");

    Checkpoint ckpt;
    ckpt.version = version;
    try {
        ckpt.hyper = hyper_from_json(header.at("hyper"));
        const json& shapes = header.at("shapes");
        check_shape(shapes, "w1", {kHiddenDim, kStateDim});
        check_shape(shapes, "b1", {kHiddenDim});
        check_shape(shapes, "w2", {kActionDim, kHiddenDim});
        check_shape(shapes, "b2", {kActionDim});
        ckpt.opt.kind = optimizer_kind_from_name(header.at("optimizer").at("kind"));
        ckpt.opt.step = header.at("optimizer").at("step").get<std::uint64_t>();
        ckpt.meta.episodes_completed = header.at("meta").at("episodes_completed").get<int>();
        ckpt.meta.seed = header.at("meta").at("seed").get<std::uint64_t>();
        ckpt.meta.data_fingerprint = header.at("meta").at("data_fingerprint").get<std::string>();
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: malformed header: ") + e.what());
    }
    ckpt.opt.lr = ckpt.hyper.lr;

    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in || count != kPayloadCount)
        throw DataError("checkpoint: payload count mismatch (expected " +
                        std::to_string(kPayloadCount) + ")");
    std::vector<double> payload(kPayloadCount);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(payload.size() * sizeof(double)))
        throw DataError("checkpoint: truncated payload");
    for (double x : payload)
        if (!std::isfinite(x)) throw DataError("checkpoint: non-finite parameter");

    const double* p = payload.data();
    p = read_params(ckpt.net, p);
    p = read_params(ckpt.opt.m, p);
    read_params(ckpt.opt.v, p);
    return ckpt;
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    return load_checkpoint(in);
}

void export_curves(std::span<const EpisodeLog> logs, const std::string& dir, bool with_svg) {
    if (logs.empty()) throw UsageError("export_curves: no episode logs");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());

    char buf[128];
    {
        std::ofstream out(dir + "/reward_curve.csv");
        if (!out) throw DataError("cannot open for writing: " + dir + "/reward_curve.csv");
        out << "episode,total_reward,cumulative_reward\n";
        double cumulative = 0.0;
        for (const EpisodeLog& log : logs) {
            cumulative += log.total_reward;
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", log.episode, log.total_reward,
                          cumulative);
            out << buf;
        }
        if (!out) throw DataError("write failed: " + dir + "/reward_curve.csv");
    }
    {
        std::ofstream out(dir + "/loss_curve.csv");
        if (!out) throw DataError("cannot open for writing: " + dir + "/loss_curve.csv");
        out << "episode,step,td_loss\n";
        for (const EpisodeLog& log : logs)
            for (const auto& [step, loss] : log.step_losses) {
                std::snprintf(buf, sizeof buf, "%d,%zu,%.17g\n", log.episode, step, loss);
                out << buf;
            }
        if (!out) throw DataError("write failed: " + dir + "/loss_curve.csv");
    }
    if (with_svg) {
        std::vector<double> episodes, rewards, mean_losses;
        for (const EpisodeLog& log : logs) {
            episodes.push_back(log.episode);
            rewards.push_back(log.total_reward);
            mean_losses.push_back(log.mean_loss());
        }
        write_svg_curve(dir + "/reward_curve.svg", episodes, rewards, "total reward per episode");
        write_svg_curve(dir + "/loss_curve.svg", episodes, mean_losses,
                        "mean td loss per episode");
    }
}

Hyperparams hyper_from_json_text(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError("config is not valid JSON");
    return hyper_from_json(j);
}

std::string hyper_to_json_text(const Hyperparams& hyper) {
    return hyper_to_json(hyper).dump(2);
}

std::string fingerprint_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string fingerprint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    return fingerprint_bytes(bytes.data(), bytes.size());
}

void zscore_normalize(std::vector<Vec6>& states) {
    if (states.empty()) return;
    Vec6 mean = Vec6::Zero();
    for (const Vec6& s : states) mean += s;
    mean /= static_cast<double>(states.size());
    Vec6 var = Vec6::Zero();
    for (const Vec6& s : states) var += (s - mean).cwiseProduct(s - mean);
    var /= static_cast<double>(states.size());
    const Vec6 sigma = var.cwiseSqrt().cwiseMax(1e-12);
    for (Vec6& s : states) s = (s - mean).cwiseQuotient(sigma);
}

}  // namespace dqmnav
