#pragma once

#include <vector>

#include "dqmnav/imu_io.hpp"
#include "dqmnav/types.hpp"

namespace dqmnav {

// WGS84 ellipsoid and normal-gravity constants.
namespace wgs84 {
inline constexpr double kSemiMajorAxis = 6378137.0;            // a [m]
inline constexpr double kFlattening = 1.0 / 298.257223563;     // f
inline constexpr double kEccSq = kFlattening * (2.0 - kFlattening);
inline constexpr double kGravityEquator = 9.7803253359;        // [m/s^2]
inline constexpr double kSomiglianaK = 0.00193185265241;
inline constexpr double kFreeAirGradient = 3.086e-6;           // [1/s^2]
}  // namespace wgs84

// Z-Y-X Euler attitude of the body frame relative to NED: roll about x,
// pitch about y, yaw about z, all in radians.
struct Attitude {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

// Navigation solution in the local NED frame. Latitude/longitude in radians,
// altitude in meters above the ellipsoid, velocity in m/s along [N, E, D].
struct NavState {
    std::int64_t t_ns = 0;
    double lat = 0.0;
    double lon = 0.0;
    double alt = 0.0;
    Vec3 vel_ned = Vec3::Zero();
    Attitude att;
};

// Somigliana normal gravity on the WGS84 ellipsoid with a free-air altitude
// correction: gamma(lat) - 3.086e-6 * alt. Positive down.
double normal_gravity(double lat_rad, double alt_m);

// Meridian (north-south) and prime-vertical (east-west) radii of curvature.
double meridian_radius(double lat_rad);
double prime_vertical_radius(double lat_rad);

// Direction cosine matrix rotating body-frame vectors into NED,
// C = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 dcm_body_to_nav(const Attitude& att);

// Euler angle rates from body angular rates [p, q, r]. Throws NumericError
// when |pitch| is within margin_rad of +-pi/2 (kinematic singularity).
Vec3 euler_rates(const Attitude& att, const Vec3& gyro, double margin_rad = 1e-6);

// One forward-Euler mechanization step of length dt_s > 0:
//   attitude from Euler rates, then velocity using the new attitude
//   (v_dot = C * f + [0, 0, gravity]), then position using the new velocity
//   with curvature radii evaluated at the old latitude.
// Earth-rate and transport-rate terms are intentionally not modeled; this
// mechanization targets short, low-speed runs. Latitudes within 1e-9 rad of
// the poles raise NumericError.
NavState ins_step(const NavState& state, const ImuSample& sample, double dt_s);

// Integrates a whole trajectory from an initial state. The first sample
// anchors the timeline, every following sample produces one output state, so
// size() - 1 states come back. Step failures are reported with the 1-based
// sample index appended.
std::vector<NavState> propagate(const NavState& init, const Trajectory& traj);
std::vector<NavState> propagate(const Trajectory& traj);

// Default start point used when no initial state is supplied:
// 39.975172 deg N, 116.344695283 deg E, 30 m altitude, zero velocity and
// attitude.
NavState default_init_state();

}  // namespace dqmnav
