#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dqmnav/types.hpp"

namespace dqmnav {

struct NavState;  // defined in ins.hpp

// One IMU record: timestamp in nanoseconds, body angular rate [rad/s],
// body specific force [m/s^2].
struct ImuSample {
    std::int64_t t_ns = 0;
    Vec3 gyro = Vec3::Zero();
    Vec3 accel = Vec3::Zero();
};

struct Trajectory {
    std::vector<ImuSample> samples;

    std::size_t size() const { return samples.size(); }
    // Sample interval between consecutive records, in seconds.
    double dt_s(std::size_t i) const {
        return static_cast<double>(samples[i].t_ns - samples[i - 1].t_ns) * 1e-9;
    }
};

// Parses EuRoC-MAV style IMU logs:
//   #timestamp [ns],w_RS_S_x [rad s^-1],...,a_RS_S_z [m s^-2]
//   1403636579758555392,-0.099134701513277898,...,8.1282937655963972
// Lines starting with '#' and blank lines are skipped. Every data line must
// have exactly 7 comma-separated numeric fields. Timestamps must be
// non-negative and strictly increasing, and at least 2 data rows are
// required. Violations raise DataError naming the 1-based line number.
Trajectory parse_imu_csv(std::istream& in);
Trajectory parse_imu_csv_file(const std::string& path);

// Writes a trajectory back out in the same CSV layout, full precision.
void write_imu_csv(const Trajectory& traj, std::ostream& out);
void write_imu_csv_file(const Trajectory& traj, const std::string& path);

// Maps each sample to the 6-channel agent state [wx, wy, wz, ax, ay, az].
std::vector<Vec6> to_agent_states(const Trajectory& traj);

// Per-step intervals dt[i] = t[i+1] - t[i] in seconds; size() - 1 entries.
std::vector<double> sample_intervals_s(const Trajectory& traj);

enum class SynthProfile { Stationary, ConstantTurn, RandomWalk };

std::optional<SynthProfile> profile_from_name(std::string_view name);
const char* profile_name(SynthProfile profile);

// Generates an ideal-sensor trajectory at a fixed rate, starting at t = 0.
//   stationary:    zero rates, specific force cancelling local gravity
//   constant_turn: level coordinated turn, 0.1 rad/s yaw rate at 5 m/s
//   random_walk:   stationary baseline plus i.i.d. Gaussian perturbations
//                  (sigma 0.01 rad/s on gyro, 0.05 m/s^2 on accel)
// The sample count is round(duration_s * rate_hz) and must be >= 2.
Trajectory synth_trajectory(SynthProfile profile, double duration_s, double rate_hz,
                            double lat_deg, double alt_m, std::uint64_t seed);

// Writes navigation states as CSV with header
//   t_ns,lat_deg,lon_deg,alt_m,vN,vE,vD,roll_deg,pitch_deg,yaw_deg
// Angles are converted to degrees on output. Empty input is a UsageError.
void write_nav_csv(const std::vector<NavState>& states, std::ostream& out);
void write_nav_csv_file(const std::vector<NavState>& states, const std::string& path);

}  // namespace dqmnav
