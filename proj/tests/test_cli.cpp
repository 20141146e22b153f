#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dqmnav/imu_io.hpp"
#include "dqmnav/trainer.hpp"
#include "test_util.hpp"

using namespace dqmnav;
using testutil::contains;
using testutil::count_lines;
using testutil::make_temp_dir;
using testutil::read_text;
using testutil::run_cli;
using testutil::run_cli_split;
using testutil::write_text;

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

// Last comma-separated field row of a CSV body.
std::vector<double> last_row_fields(const std::string& csv) {
    const auto end = csv.find_last_not_of('\n');
    const auto start = csv.find_last_of('\n', end);
    std::vector<double> fields;
    std::istringstream row(csv.substr(start + 1, end - start));
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(std::stod(field));
    return fields;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help is a success") {
    const auto r = run_cli("--help");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "train"));
    CHECK(contains(r.output, "propagate"));
    CHECK(contains(r.output, "synth"));
}

TEST_CASE("a bare invocation is a usage error") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("frobnicate").exit_code == 1);
}

TEST_CASE("synth writes a parseable log") {
    const auto dir = make_temp_dir("cli_synth");
    const auto out = (dir / "imu.csv").string();
    const auto r =
        run_cli("synth --profile stationary --duration-s 1 --rate-hz 100 --out " + out);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "wrote 100 samples"));
    const Trajectory traj = parse_imu_csv_file(out);
    CHECK(traj.size() == 100);
}

TEST_CASE("synth validates profile and required options") {
    const auto dir = make_temp_dir("cli_synth_bad");
    const auto out = (dir / "imu.csv").string();
    const auto bad =
        run_cli("synth --profile hover --duration-s 1 --rate-hz 100 --out " + out);
    CHECK(bad.exit_code == 1);
    CHECK(contains(bad.output, "stationary"));
    CHECK(contains(bad.output, "constant_turn"));
    CHECK(contains(bad.output, "random_walk"));
    CHECK(run_cli("synth --profile stationary --rate-hz 100 --out " + out).exit_code == 1);
    CHECK(run_cli("synth --profile stationary --duration-s 0 --rate-hz 100 --out " + out)
              .exit_code == 1);
}

TEST_CASE("propagate holds still on a stationary log") {
    const auto dir = make_temp_dir("cli_prop");
    const auto imu = (dir / "imu.csv").string();
    const auto nav = (dir / "nav.csv").string();
    REQUIRE(run_cli("synth --profile stationary --duration-s 2 --rate-hz 100 --out " + imu)
                .exit_code == 0);
    const auto r = run_cli("propagate --imu " + imu + " --out " + nav);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "wrote 199 nav states"));

    const std::string csv = read_text(nav);
    CHECK(count_lines(csv) == 200);  // header + 199 rows
    CHECK(contains(csv, "t_ns,lat_deg,lon_deg,alt_m,vN,vE,vD,roll_deg,pitch_deg,yaw_deg"));
    const auto fields = last_row_fields(csv);
    REQUIRE(fields.size() == 10);
    CHECK(std::abs(fields[1] - 39.975172) < 1e-9);
    CHECK(std::abs(fields[2] - 116.344695283) < 1e-9);
    CHECK(std::abs(fields[3] - 30.0) < 1e-9);
}

TEST_CASE("propagate honors a custom init state") {
    const auto dir = make_temp_dir("cli_prop_init");
    const auto imu = (dir / "imu.csv").string();
    const auto nav = (dir / "nav.csv").string();
    REQUIRE(run_cli("synth --profile stationary --duration-s 1 --rate-hz 50 --lat 10 --alt 0 "
                    "--out " +
                    imu)
                .exit_code == 0);
    write_text(dir / "init.json", R"({"lat_deg": 10.0, "alt_m": 0.0, "yaw_deg": 90.0})");
    const auto r = run_cli("propagate --imu " + imu + " --out " + nav + " --init " +
                           (dir / "init.json").string());
    CHECK(r.exit_code == 0);
    const auto fields = last_row_fields(read_text(nav));
    CHECK(std::abs(fields[1] - 10.0) < 1e-9);
    CHECK(std::abs(fields[9] - 90.0) < 1e-9);

    write_text(dir / "bad.json", R"({"latitude": 10.0})");
    CHECK(run_cli("propagate --imu " + imu + " --out " + nav + " --init " +
                  (dir / "bad.json").string())
              .exit_code == 2);
}

TEST_CASE("propagate reports numeric failures with the sample index") {
    const auto dir = make_temp_dir("cli_prop_gimbal");
    const auto imu = (dir / "imu.csv").string();
    REQUIRE(run_cli("synth --profile stationary --duration-s 1 --rate-hz 50 --out " + imu)
                .exit_code == 0);
    write_text(dir / "init.json", R"({"pitch_deg": 89.9999999})");
    const auto r = run_cli_split("propagate --imu " + imu + " --out " + (dir / "nav.csv").string() +
                                 " --init " + (dir / "init.json").string());
    CHECK(r.exit_code == 3);
    CHECK(contains(r.err, "gimbal"));
    CHECK(contains(r.err, "sample"));
}

TEST_CASE("propagate rejects missing or bad inputs") {
    const auto dir = make_temp_dir("cli_prop_bad");
    CHECK(run_cli("propagate --out " + (dir / "nav.csv").string()).exit_code == 1);
    CHECK(run_cli("propagate --imu " + (dir / "missing.csv").string() + " --out " +
                  (dir / "nav.csv").string())
              .exit_code == 2);
    write_text(dir / "short.csv", "100,0,0,0,0,0,-9.8\n");
    CHECK(run_cli("propagate --imu " + (dir / "short.csv").string() + " --out " +
                  (dir / "nav.csv").string())
              .exit_code == 2);
}

TEST_CASE("dump-config prints the reference defaults") {
    const auto r = run_cli("train --dump-config");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.output);
    CHECK(j.at("batch_size") == 32);
    CHECK(j.at("lr") == 0.001);
    CHECK(j.at("epsilon") == 0.9);
    CHECK(j.at("gamma") == 0.9);
    CHECK(j.at("target_replace_iter") == 100);
    CHECK(j.at("memory_capacity") == 2000);
    CHECK(j.at("n_actions") == 2);
    CHECK(j.at("n_states") == 6);
    CHECK(j.at("kp") == 1.0);
    CHECK(j.at("ki") == 0.5);
    CHECK(j.at("kd") == 0.2);
    CHECK(j.at("reward_kind") == "sigmoid");
    CHECK(j.at("episodes") == 20);

    const auto overridden = run_cli("train --dump-config --reward inverse_log --episodes 5");
    const auto j2 = nlohmann::json::parse(overridden.output);
    CHECK(j2.at("reward_kind") == "inverse_log");
    CHECK(j2.at("episodes") == 5);
}

TEST_CASE("train runs end to end and exports curves") {
    const auto dir = make_temp_dir("cli_train");
    const auto imu = (dir / "imu.csv").string();
    const auto model = (dir / "model.dqm").string();
    const auto curves = (dir / "curves").string();
    REQUIRE(run_cli("synth --profile random_walk --duration-s 1.5 --rate-hz 100 --seed 4 --out " +
                    imu)
                .exit_code == 0);
    write_text(dir / "config.json", R"({"memory_capacity": 64, "batch_size": 16})");

    const auto r = run_cli("train --imu " + imu + " --out-model " + model + " --config " +
                           (dir / "config.json").string() +
                           " --episodes 2 --seed 3 --curves " + curves);
    CHECK(r.exit_code == 0);
    CHECK(count_occurrences(r.output, "episode ") == 2);
    CHECK(contains(r.output, "wrote model to"));

    const Checkpoint ckpt = load_checkpoint_file(model);
    CHECK(ckpt.hyper.memory_capacity == 64);
    CHECK(ckpt.hyper.batch_size == 16);
    CHECK(ckpt.hyper.episodes == 2);
    CHECK(ckpt.hyper.seed == 3);
    CHECK(ckpt.meta.data_fingerprint == fingerprint_file(imu));

    const std::string rewards = read_text(std::filesystem::path(curves) / "reward_curve.csv");
    CHECK(count_lines(rewards) == 3);  // header + 2 episodes
}

TEST_CASE("train validates its flags and config") {
    const auto dir = make_temp_dir("cli_train_bad");
    const auto imu = (dir / "imu.csv").string();
    REQUIRE(run_cli("synth --profile random_walk --duration-s 1 --rate-hz 50 --out " + imu)
                .exit_code == 0);

    CHECK(run_cli("train --out-model " + (dir / "m.dqm").string()).exit_code == 1);
    CHECK(run_cli("train --imu " + imu).exit_code == 1);

    const auto bad_reward = run_cli("train --imu " + imu + " --out-model " +
                                    (dir / "m.dqm").string() + " --reward entropy");
    CHECK(bad_reward.exit_code == 1);
    for (const char* name : {"inverse_proportion", "sigmoid", "inverse_log", "inverse_quadratic",
                             "inverse_sin", "inverse_cos", "inverse_tan"})
        CHECK(contains(bad_reward.output, name));

    write_text(dir / "bad.json", R"({"batch_sizes": 16})");
    CHECK(run_cli("train --imu " + imu + " --out-model " + (dir / "m.dqm").string() +
                  " --config " + (dir / "bad.json").string())
              .exit_code == 2);
    CHECK(run_cli("train --imu " + (dir / "missing.csv").string() + " --out-model " +
                  (dir / "m.dqm").string())
              .exit_code == 2);
}

TEST_CASE("eval restores a model and flags foreign data") {
    const auto dir = make_temp_dir("cli_eval");
    const auto imu_a = (dir / "a.csv").string();
    const auto imu_b = (dir / "b.csv").string();
    const auto model = (dir / "model.dqm").string();
    REQUIRE(run_cli("synth --profile random_walk --duration-s 1.5 --rate-hz 100 --seed 4 --out " +
                    imu_a)
                .exit_code == 0);
    REQUIRE(run_cli("synth --profile random_walk --duration-s 1.5 --rate-hz 100 --seed 5 --out " +
                    imu_b)
                .exit_code == 0);
    write_text(dir / "config.json", R"({"memory_capacity": 64, "batch_size": 16})");
    REQUIRE(run_cli("train --imu " + imu_a + " --out-model " + model + " --config " +
                    (dir / "config.json").string() + " --episodes 2 --seed 3")
                .exit_code == 0);

    const auto same = run_cli_split("eval --model " + model + " --imu " + imu_a);
    CHECK(same.exit_code == 0);
    CHECK(count_occurrences(same.output, "episode ") == 2);  // episodes from the checkpoint
    CHECK_FALSE(contains(same.err, "fingerprint"));

    const auto other = run_cli_split("eval --model " + model + " --imu " + imu_b +
                                     " --episodes 1");
    CHECK(other.exit_code == 0);
    CHECK(contains(other.err, "fingerprint mismatch"));
    CHECK(count_occurrences(other.output, "episode ") == 1);

    CHECK(run_cli("eval --model " + (dir / "nope.dqm").string() + " --imu " + imu_a).exit_code ==
          2);
    write_text(dir / "junk.dqm", "junk bytes");
    CHECK(run_cli("eval --model " + (dir / "junk.dqm").string() + " --imu " + imu_a).exit_code ==
          2);
}

TEST_CASE("identically seeded train runs are byte-identical") {
    const auto dir = make_temp_dir("cli_repro");
    const auto imu = (dir / "imu.csv").string();
    REQUIRE(run_cli("synth --profile random_walk --duration-s 1.5 --rate-hz 100 --seed 8 --out " +
                    imu)
                .exit_code == 0);
    write_text(dir / "config.json", R"({"memory_capacity": 64, "batch_size": 16})");

    const std::string common = "train --imu " + imu + " --config " +
                               (dir / "config.json").string() + " --episodes 2 --seed 11 ";
    REQUIRE(run_cli(common + "--out-model " + (dir / "m1.dqm").string() + " --curves " +
                    (dir / "c1").string())
                .exit_code == 0);
    REQUIRE(run_cli(common + "--out-model " + (dir / "m2.dqm").string() + " --curves " +
                    (dir / "c2").string())
                .exit_code == 0);

    CHECK(read_text(dir / "m1.dqm") == read_text(dir / "m2.dqm"));
    CHECK(read_text(dir / "c1" / "reward_curve.csv") == read_text(dir / "c2" / "reward_curve.csv"));
    CHECK(read_text(dir / "c1" / "loss_curve.csv") == read_text(dir / "c2" / "loss_curve.csv"));
}

}  // TEST_SUITE
