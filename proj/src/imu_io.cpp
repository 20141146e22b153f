#include "dqmnav/imu_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dqmnav/errors.hpp"
#include "dqmnav/ins.hpp"
#include "dqmnav/rng.hpp"

namespace dqmnav {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRadToDeg = 180.0 / M_PI;

// Synthetic profile constants: a gentle coordinated turn and mild sensor
// perturbations, sized so one-second integrations stay well-conditioned.
constexpr double kTurnYawRate = 0.1;   // rad/s
constexpr double kTurnSpeed = 5.0;     // m/s
constexpr double kWalkGyroSigma = 0.01;   // rad/s
constexpr double kWalkAccelSigma = 0.05;  // m/s^2

const char* kImuHeader =
    "#timestamp [ns],w_RS_S_x [rad s^-1],w_RS_S_y [rad s^-1],w_RS_S_z [rad s^-1],"
    "a_RS_S_x [m s^-2],a_RS_S_y [m s^-2],a_RS_S_z [m s^-2]";

std::string_view trimmed(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& what) {
    throw DataError("imu csv line " + std::to_string(line_no) + ": " + what);
}

double parse_double_field(std::string_view field, std::size_t line_no) {
    field = trimmed(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        bad_line(line_no, "not a number: '" + std::string(field) + "'");
    if (!std::isfinite(value)) bad_line(line_no, "non-finite value");
    return value;
}

std::int64_t parse_timestamp_field(std::string_view field, std::size_t line_no) {
    field = trimmed(field);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        bad_line(line_no, "not an integer timestamp: '" + std::string(field) + "'");
    if (value < 0) bad_line(line_no, "negative timestamp");
    return value;
}

}  // namespace

Trajectory parse_imu_csv(std::istream& in) {
    Trajectory traj;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string_view text = trimmed(line);
        if (text.empty() || text.front() == '#') continue;

        std::array<std::string_view, 7> fields;
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = text.find(',', start);
            const auto field = text.substr(start, comma == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : comma - start);
            if (count == fields.size())
                bad_line(line_no, "expected 7 fields, found more");
            fields[count++] = field;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (count != fields.size())
            bad_line(line_no, "expected 7 fields, found " + std::to_string(count));

        ImuSample s;
        s.t_ns = parse_timestamp_field(fields[0], line_no);
        for (int i = 0; i < 3; ++i) s.gyro[i] = parse_double_field(fields[1 + i], line_no);
        for (int i = 0; i < 3; ++i) s.accel[i] = parse_double_field(fields[4 + i], line_no);

        if (!traj.samples.empty() && s.t_ns <= traj.samples.back().t_ns)
            bad_line(line_no, "timestamps must increase strictly");
        traj.samples.push_back(s);
    }
    if (traj.samples.size() < 2)
        throw DataError("imu csv: needs at least 2 data rows, got " +
                        std::to_string(traj.samples.size()));
    return traj;
}

Trajectory parse_imu_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open imu csv: " + path);
    return parse_imu_csv(in);
}

void write_imu_csv(const Trajectory& traj, std::ostream& out) {
    out << kImuHeader << '\n';
    char buf[256];
    for (const ImuSample& s : traj.samples) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(s.t_ns), s.gyro[0], s.gyro[1], s.gyro[2],
                      s.accel[0], s.accel[1], s.accel[2]);
        out << buf;
    }
    if (!out) throw DataError("imu csv write failed");
}

void write_imu_csv_file(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    write_imu_csv(traj, out);
}

std::vector<Vec6> to_agent_states(const Trajectory& traj) {
    std::vector<Vec6> states;
    states.reserve(traj.samples.size());
    for (const ImuSample& s : traj.samples) {
        Vec6 v;
        v << s.gyro[0], s.gyro[1], s.gyro[2], s.accel[0], s.accel[1], s.accel[2];
        states.push_back(v);
    }
    return states;
}

std::vector<double> sample_intervals_s(const Trajectory& traj) {
    std::vector<double> dts;
    if (traj.samples.size() < 2) return dts;
    dts.reserve(traj.samples.size() - 1);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) dts.push_back(traj.dt_s(i));
    return dts;
}

std::optional<SynthProfile> profile_from_name(std::string_view name) {
    if (name == "stationary") return SynthProfile::Stationary;
    if (name == "constant_turn") return SynthProfile::ConstantTurn;
    if (name == "random_walk") return SynthProfile::RandomWalk;
    return std::nullopt;
}

const char* profile_name(SynthProfile profile) {
    switch (profile) {
        case SynthProfile::Stationary: return "stationary";
        case SynthProfile::ConstantTurn: return "constant_turn";
        case SynthProfile::RandomWalk: return "random_walk";
    }
    return "?";
}

Trajectory synth_trajectory(SynthProfile profile, double duration_s, double rate_hz,
                            double lat_deg, double alt_m, std::uint64_t seed) {
    if (!(duration_s > 0.0)) throw UsageError("synth: duration must be > 0");
    if (!(rate_hz > 0.0)) throw UsageError("synth: rate must be > 0");
    const auto n = static_cast<std::int64_t>(std::llround(duration_s * rate_hz));
    if (n < 2) throw UsageError("synth: duration * rate must give at least 2 samples");
    const auto step_ns = static_cast<std::int64_t>(std::llround(1e9 / rate_hz));
    if (step_ns < 1) throw UsageError("synth: rate too high for nanosecond timestamps");

    const double lat_rad = lat_deg * kDegToRad;
    const double gravity = normal_gravity(lat_rad, alt_m);

    Rng rng(seed);
    Trajectory traj;
    traj.samples.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        ImuSample s;
        s.t_ns = i * step_ns;
        switch (profile) {
            case SynthProfile::Stationary:
                s.gyro = Vec3::Zero();
                s.accel = Vec3(0.0, 0.0, -gravity);
                break;
            case SynthProfile::ConstantTurn:
                // Level coordinated turn: yaw rate about body z, centripetal
                // specific force along body y, lift cancelling gravity.
                s.gyro = Vec3(0.0, 0.0, kTurnYawRate);
                s.accel = Vec3(0.0, kTurnSpeed * kTurnYawRate, -gravity);
                break;
            case SynthProfile::RandomWalk:
                s.gyro = Vec3(kWalkGyroSigma * rng.gaussian(), kWalkGyroSigma * rng.gaussian(),
                              kWalkGyroSigma * rng.gaussian());
                s.accel = Vec3(kWalkAccelSigma * rng.gaussian(), kWalkAccelSigma * rng.gaussian(),
                               -gravity + kWalkAccelSigma * rng.gaussian());
                break;
        }
        traj.samples.push_back(s);
    }
    return traj;
}

void write_nav_csv(const std::vector<NavState>& states, std::ostream& out) {
    if (states.empty()) throw UsageError("write_nav_csv: no states");
    out << "t_ns,lat_deg,lon_deg,alt_m,vN,vE,vD,roll_deg,pitch_deg,yaw_deg\n";
    char buf[384];
    for (const NavState& s : states) {
        std::snprintf(buf, sizeof buf,
                      "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(s.t_ns), s.lat * kRadToDeg, s.lon * kRadToDeg,
                      s.alt, s.vel_ned[0], s.vel_ned[1], s.vel_ned[2], s.att.roll * kRadToDeg,
                      s.att.pitch * kRadToDeg, s.att.yaw * kRadToDeg);
        out << buf;
    }
    if (!out) throw DataError("nav csv write failed");
}

void write_nav_csv_file(const std::vector<NavState>& states, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    write_nav_csv(states, out);
}

}  // namespace dqmnav
