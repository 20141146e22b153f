#include "dqmnav/ins.hpp"

#include <cmath>
#include <string>

#include "dqmnav/errors.hpp"

namespace dqmnav {

namespace {

constexpr double kHalfPi = M_PI / 2.0;
constexpr double kDegToRad = M_PI / 180.0;
constexpr double kPolarMargin = 1e-9;  // rad; lon rate divides by cos(lat)

double wrap_pi(double angle) {
    if (angle > -M_PI && angle <= M_PI) return angle;  // keep in-range values bit-exact
    double a = std::fmod(angle + M_PI, 2.0 * M_PI);
    if (a <= 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

void check_not_polar(double lat) {
    if (std::abs(lat) >= kHalfPi - kPolarMargin)
        throw NumericError("polar singularity: latitude too close to +-pi/2");
}

}  // namespace

double normal_gravity(double lat_rad, double alt_m) {
    const double s2 = std::sin(lat_rad) * std::sin(lat_rad);
    const double gamma = wgs84::kGravityEquator * (1.0 + wgs84::kSomiglianaK * s2) /
                         std::sqrt(1.0 - wgs84::kEccSq * s2);
    return gamma - wgs84::kFreeAirGradient * alt_m;
}

double meridian_radius(double lat_rad) {
    const double s2 = std::sin(lat_rad) * std::sin(lat_rad);
    const double w = 1.0 - wgs84::kEccSq * s2;
    return wgs84::kSemiMajorAxis * (1.0 - wgs84::kEccSq) / (w * std::sqrt(w));
}

double prime_vertical_radius(double lat_rad) {
    const double s2 = std::sin(lat_rad) * std::sin(lat_rad);
    return wgs84::kSemiMajorAxis / std::sqrt(1.0 - wgs84::kEccSq * s2);
}

Mat3 dcm_body_to_nav(const Attitude& att) {
    const double cr = std::cos(att.roll), sr = std::sin(att.roll);
    const double cp = std::cos(att.pitch), sp = std::sin(att.pitch);
    const double cy = std::cos(att.yaw), sy = std::sin(att.yaw);
    Mat3 c;
    c << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
         -sp,     cp * sr,                cp * cr;
    return c;
}

Vec3 euler_rates(const Attitude& att, const Vec3& gyro, double margin_rad) {
    if (std::abs(att.pitch) >= kHalfPi - margin_rad)
        throw NumericError("gimbal singularity: |pitch| within margin of pi/2");
    const double sr = std::sin(att.roll), cr = std::cos(att.roll);
    const double tp = std::tan(att.pitch), secp = 1.0 / std::cos(att.pitch);
    const double p = gyro[0], q = gyro[1], r = gyro[2];
    return {p + (q * sr + r * cr) * tp,
            q * cr - r * sr,
            (q * sr + r * cr) * secp};
}

NavState ins_step(const NavState& state, const ImuSample& sample, double dt_s) {
    if (!(dt_s > 0.0)) throw UsageError("ins_step: dt must be > 0");
    check_not_polar(state.lat);

    const Vec3 rates = euler_rates(state.att, sample.gyro);
    Attitude att{state.att.roll + rates[0] * dt_s,
                 state.att.pitch + rates[1] * dt_s,
                 state.att.yaw + rates[2] * dt_s};

    const double gravity = normal_gravity(state.lat, state.alt);
    const Vec3 v_dot = dcm_body_to_nav(att) * sample.accel + Vec3(0.0, 0.0, gravity);
    const Vec3 vel = state.vel_ned + v_dot * dt_s;

    const double rm = meridian_radius(state.lat);
    const double rn = prime_vertical_radius(state.lat);
    const double lat = state.lat + vel[0] / (rm + state.alt) * dt_s;
    const double lon = state.lon + vel[1] / ((rn + state.alt) * std::cos(state.lat)) * dt_s;
    const double alt = state.alt - vel[2] * dt_s;
    check_not_polar(lat);

    NavState next;
    next.t_ns = sample.t_ns;
    next.lat = lat;
    next.lon = wrap_pi(lon);
    next.alt = alt;
    next.vel_ned = vel;
    next.att = att;
    return next;
}

std::vector<NavState> propagate(const NavState& init, const Trajectory& traj) {
    if (traj.samples.size() < 2)
        throw DataError("propagate: trajectory needs at least 2 samples");
    std::vector<NavState> out;
    out.reserve(traj.samples.size() - 1);
    NavState state = init;
    state.t_ns = traj.samples.front().t_ns;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        try {
            state = ins_step(state, traj.samples[i], traj.dt_s(i));
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (sample " + std::to_string(i) + ")");
        }
        out.push_back(state);
    }
    return out;
}

std::vector<NavState> propagate(const Trajectory& traj) {
    return propagate(default_init_state(), traj);
}

NavState default_init_state() {
    NavState s;
    s.lat = 39.975172 * kDegToRad;
    s.lon = 116.344695283 * kDegToRad;
    s.alt = 30.0;
    return s;
}

}  // namespace dqmnav
