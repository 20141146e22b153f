#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dqmnav/errors.hpp"
#include "dqmnav/imu_io.hpp"
#include "dqmnav/ins.hpp"
#include "dqmnav/trainer.hpp"

using namespace dqmnav;
using nlohmann::json;

namespace {

constexpr const char* kRewardNames =
    "inverse_proportion, sigmoid, inverse_log, inverse_quadratic, inverse_sin, "
    "inverse_cos, inverse_tan";

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + what + ": " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_episode(const EpisodeLog& log, int total) {
    std::printf(
        "episode %d/%d  steps=%zu  total_reward=%.10g  mean_loss=%.6g  adjust=%lld"
        "  no_adjust=%lld  mean_err_adjust=%.6g  mean_r_adjust=%.6g  mean_r_no_adjust=%.6g\n",
        log.episode, total, log.steps(), log.total_reward, log.mean_loss(),
        static_cast<long long>(log.action_counts[0]),
        static_cast<long long>(log.action_counts[1]), log.mean_error_adjust,
        log.mean_reward_adjust, log.mean_reward_no_adjust);
    std::fflush(stdout);
}

RewardKind parse_reward_name(const std::string& name) {
    const auto kind = reward_kind_from_name(name);
    if (!kind)
        throw UsageError("unknown reward function '" + name + "'; valid: " + kRewardNames);
    return *kind;
}

NavState init_state_from_json(const std::string& path) {
    const json j = json::parse(read_file(path, "init state"), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw DataError("init state file is not a JSON object: " + path);
    NavState s = default_init_state();
    constexpr double kDegToRad = M_PI / 180.0;
    for (const auto& [key, value] : j.items()) {
        double v = 0.0;
        try {
            v = value.get<double>();
        } catch (const json::exception&) {
            throw DataError("init state key '" + key + "' must be a number");
        }
        if (key == "lat_deg")
            s.lat = v * kDegToRad;
        else if (key == "lon_deg")
            s.lon = v * kDegToRad;
        else if (key == "alt_m")
            s.alt = v;
        else if (key == "vn")
            s.vel_ned[0] = v;
        else if (key == "ve")
            s.vel_ned[1] = v;
        else if (key == "vd")
            s.vel_ned[2] = v;
        else if (key == "roll_deg")
            s.att.roll = v * kDegToRad;
        else if (key == "pitch_deg")
            s.att.pitch = v * kDegToRad;
        else if (key == "yaw_deg")
            s.att.yaw = v * kDegToRad;
        else
            throw DataError("unknown init state key '" + key + "'");
    }
    return s;
}

void setup_train(CLI::App& app) {
    struct Opts {
        std::string imu, out_model, config, curves, reward;
        std::uint64_t seed = 0;
        int episodes = 0;
        bool svg = false;
        bool dump_config = false;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand("train", "Train the modulation agent on an IMU log");
    cmd->add_option("--imu", opts->imu, "input IMU csv (EuRoC format)");
    cmd->add_option("--out-model", opts->out_model, "output checkpoint path");
    cmd->add_option("--config", opts->config, "JSON hyperparameter file");
    cmd->add_option("--curves", opts->curves, "directory for reward/loss curve exports");
    auto* seed_opt = cmd->add_option("--seed", opts->seed, "RNG seed (overrides config)");
    auto* ep_opt = cmd->add_option("--episodes", opts->episodes, "episodes (overrides config)");
    auto* rw_opt = cmd->add_option("--reward", opts->reward, "reward function (overrides config)");
    cmd->add_flag("--svg", opts->svg, "with --curves, also write SVG plots");
    cmd->add_flag("--dump-config", opts->dump_config,
                  "print the effective hyperparameters as JSON and exit");

    cmd->callback([opts, seed_opt, ep_opt, rw_opt] {
        Hyperparams hyper;
        if (!opts->config.empty())
            hyper = hyper_from_json_text(read_file(opts->config, "config"));
        if (seed_opt->count() > 0) hyper.seed = opts->seed;
        if (ep_opt->count() > 0) hyper.episodes = opts->episodes;
        if (rw_opt->count() > 0) hyper.reward_kind = parse_reward_name(opts->reward);
        hyper.validate();

        if (opts->dump_config) {
            std::cout << hyper_to_json_text(hyper) << "\n";
            return;
        }
        if (opts->imu.empty()) throw UsageError("train: --imu is required");
        if (opts->out_model.empty()) throw UsageError("train: --out-model is required");

        const Trajectory traj = parse_imu_csv_file(opts->imu);
        const std::string fingerprint = fingerprint_file(opts->imu);
        std::printf("training on %s: %zu samples, %d episodes, reward=%s, seed=%llu\n",
                    opts->imu.c_str(), traj.size(), hyper.episodes,
                    reward_kind_name(hyper.reward_kind),
                    static_cast<unsigned long long>(hyper.seed));

        const auto [ckpt, logs] = train(hyper, traj, fingerprint, [&](const EpisodeLog& log) {
            print_episode(log, hyper.episodes);
        });
        save_checkpoint_file(ckpt, opts->out_model);
        std::printf("wrote model to %s\n", opts->out_model.c_str());
        if (!opts->curves.empty()) {
            export_curves(logs, opts->curves, opts->svg);
            std::printf("wrote curves to %s\n", opts->curves.c_str());
        }
    });
}

void setup_eval(CLI::App& app) {
    struct Opts {
        std::string model, imu, curves;
        int episodes = 0;
        bool svg = false;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand("eval", "Continue learning from a checkpoint on new data");
    cmd->add_option("--model", opts->model, "checkpoint path")->required();
    cmd->add_option("--imu", opts->imu, "input IMU csv (EuRoC format)")->required();
    auto* ep_opt = cmd->add_option("--episodes", opts->episodes,
                                   "episodes (default: value stored in the model)");
    cmd->add_option("--curves", opts->curves, "directory for reward/loss curve exports");
    cmd->add_flag("--svg", opts->svg, "with --curves, also write SVG plots");

    cmd->callback([opts, ep_opt] {
        const Checkpoint ckpt = load_checkpoint_file(opts->model);
        const Trajectory traj = parse_imu_csv_file(opts->imu);
        const std::string fingerprint = fingerprint_file(opts->imu);
        if (!ckpt.meta.data_fingerprint.empty() &&
            ckpt.meta.data_fingerprint != fingerprint) {
            std::fprintf(stderr,
                         "warning: data fingerprint mismatch (model trained on %s, input is %s)\n",
                         ckpt.meta.data_fingerprint.c_str(), fingerprint.c_str());
        }
        const int episodes = ep_opt->count() > 0 ? opts->episodes : ckpt.hyper.episodes;
        std::printf("evaluating %s on %s: %zu samples, %d episodes\n", opts->model.c_str(),
                    opts->imu.c_str(), traj.size(), episodes);
        const auto logs = evaluate(ckpt, traj, episodes, [&](const EpisodeLog& log) {
            print_episode(log, episodes);
        });
        if (!opts->curves.empty()) {
            export_curves(logs, opts->curves, opts->svg);
            std::printf("wrote curves to %s\n", opts->curves.c_str());
        }
    });
}

void setup_propagate(CLI::App& app) {
    struct Opts {
        std::string imu, out, init;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd =
        app.add_subcommand("propagate", "Integrate an IMU log through the strapdown mechanization");
    cmd->add_option("--imu", opts->imu, "input IMU csv (EuRoC format)")->required();
    cmd->add_option("--out", opts->out, "output nav-state csv")->required();
    cmd->add_option("--init", opts->init,
                    "JSON initial state (keys: lat_deg, lon_deg, alt_m, vn, ve, vd, roll_deg, "
                    "pitch_deg, yaw_deg); defaults used for missing keys");

    cmd->callback([opts] {
        const Trajectory traj = parse_imu_csv_file(opts->imu);
        const NavState init =
            opts->init.empty() ? default_init_state() : init_state_from_json(opts->init);
        const auto states = propagate(init, traj);
        write_nav_csv_file(states, opts->out);
        std::printf("wrote %zu nav states to %s\n", states.size(), opts->out.c_str());
    });
}

void setup_synth(CLI::App& app) {
    struct Opts {
        std::string profile, out;
        double duration_s = 0.0, rate_hz = 0.0;
        double lat_deg = 39.975172, alt_m = 30.0;
        std::uint64_t seed = 0;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand("synth", "Generate a synthetic IMU log");
    cmd->add_option("--profile", opts->profile,
                    "motion profile: stationary, constant_turn, random_walk")
        ->required();
    cmd->add_option("--duration-s", opts->duration_s, "log duration in seconds")->required();
    cmd->add_option("--rate-hz", opts->rate_hz, "sample rate in Hz")->required();
    cmd->add_option("--out", opts->out, "output IMU csv path")->required();
    cmd->add_option("--seed", opts->seed, "RNG seed")->capture_default_str();
    cmd->add_option("--lat", opts->lat_deg, "latitude in degrees")->capture_default_str();
    cmd->add_option("--alt", opts->alt_m, "altitude in meters")->capture_default_str();

    cmd->callback([opts] {
        const auto profile = profile_from_name(opts->profile);
        if (!profile)
            throw UsageError("unknown profile '" + opts->profile +
                             "'; valid: stationary, constant_turn, random_walk");
        const Trajectory traj = synth_trajectory(*profile, opts->duration_s, opts->rate_hz,
                                                 opts->lat_deg, opts->alt_m, opts->seed);
        write_imu_csv_file(traj, opts->out);
        std::printf("wrote %zu samples to %s\n", traj.size(), opts->out.c_str());
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "dqmnav: a value-learning IMU modulation agent with a strapdown NED mechanization"};
    app.require_subcommand(1);
    setup_train(app);
    setup_eval(app);
    setup_propagate(app);
    setup_synth(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
