#include <doctest.h>

#include <cmath>

#include "dqmnav/errors.hpp"
#include "dqmnav/imu_io.hpp"
#include "dqmnav/ins.hpp"
#include "dqmnav/rng.hpp"
#include "test_util.hpp"

using namespace dqmnav;
using testutil::contains;
using testutil::thrown_message;

namespace {

// Oracle evaluations of the Somigliana model and the curvature radii,
// written independently of the library implementation.
double oracle_gravity(double lat, double alt) {
    const double f = 1.0 / 298.257223563;
    const double e2 = f * (2.0 - f);
    const double s2 = std::sin(lat) * std::sin(lat);
    return 9.7803253359 * (1.0 + 0.00193185265241 * s2) / std::sqrt(1.0 - e2 * s2) -
           3.086e-6 * alt;
}

double oracle_meridian(double lat) {
    const double e2 = (1.0 / 298.257223563) * (2.0 - 1.0 / 298.257223563);
    const double s2 = std::sin(lat) * std::sin(lat);
    return 6378137.0 * (1.0 - e2) / std::pow(1.0 - e2 * s2, 1.5);
}

// Horizontal+vertical distance in meters between two nav solutions.
double position_error_m(const NavState& a, const NavState& b) {
    const double rm = meridian_radius(a.lat) + a.alt;
    const double rn = (prime_vertical_radius(a.lat) + a.alt) * std::cos(a.lat);
    const double dn = (a.lat - b.lat) * rm;
    const double de = (a.lon - b.lon) * rn;
    const double dd = a.alt - b.alt;
    return std::sqrt(dn * dn + de * de + dd * dd);
}

ImuSample stationary_sample(std::int64_t t_ns, double lat, double alt) {
    ImuSample s;
    s.t_ns = t_ns;
    s.accel = Vec3(0.0, 0.0, -normal_gravity(lat, alt));
    return s;
}

}  // namespace

TEST_SUITE("ins") {

TEST_CASE("normal gravity hits the Somigliana endpoints") {
    CHECK(normal_gravity(0.0, 0.0) == doctest::Approx(9.7803253359).epsilon(1e-12));
    CHECK(std::abs(normal_gravity(M_PI / 2.0, 0.0) - 9.8321849379) < 1e-9);
}

TEST_CASE("normal gravity matches an independent oracle across latitudes") {
    for (double lat = -1.5; lat <= 1.5; lat += 0.05)
        for (double alt : {0.0, 30.0, 1000.0})
            CHECK(normal_gravity(lat, alt) == doctest::Approx(oracle_gravity(lat, alt)).epsilon(1e-14));
}

TEST_CASE("gravity grows with |latitude| and shrinks with altitude") {
    double prev = normal_gravity(0.0, 0.0);
    for (double lat = 0.1; lat <= 1.5; lat += 0.1) {
        const double g = normal_gravity(lat, 0.0);
        CHECK(g > prev);
        prev = g;
    }
    const double lat = 39.975172 * M_PI / 180.0;
    CHECK(normal_gravity(lat, 30.0) < normal_gravity(lat, 0.0));
    CHECK(normal_gravity(lat, 0.0) > normal_gravity(0.0, 0.0));
    CHECK(normal_gravity(lat, 0.0) < normal_gravity(M_PI / 2.0, 0.0));
}

TEST_CASE("curvature radii match the ellipsoid formulas") {
    CHECK(prime_vertical_radius(0.0) == 6378137.0);
    for (double lat = -1.5; lat <= 1.5; lat += 0.25) {
        CHECK(meridian_radius(lat) == doctest::Approx(oracle_meridian(lat)).epsilon(1e-14));
        CHECK(meridian_radius(lat) < prime_vertical_radius(lat));
    }
}

TEST_CASE("dcm is orthonormal with unit determinant") {
    Rng rng(17);
    for (int i = 0; i < 300; ++i) {
        const Attitude att{(rng.uniform() - 0.5) * 6.0, (rng.uniform() - 0.5) * 3.0,
                           (rng.uniform() - 0.5) * 6.0};
        const Mat3 c = dcm_body_to_nav(att);
        CHECK((c.transpose() * c - Mat3::Identity()).norm() < 1e-12);
        CHECK(std::abs(c.determinant() - 1.0) < 1e-12);
    }
}

TEST_CASE("dcm yaw of 90 degrees maps body-forward to east") {
    CHECK(dcm_body_to_nav(Attitude{}) == Mat3::Identity());
    const Mat3 c = dcm_body_to_nav(Attitude{0.0, 0.0, M_PI / 2.0});
    const Vec3 east = c * Vec3(1.0, 0.0, 0.0);
    CHECK(std::abs(east[0]) < 1e-15);
    CHECK(east[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(east[2]) < 1e-15);
}

TEST_CASE("euler rates reduce to body rates at level attitude") {
    const Vec3 gyro(0.01, -0.02, 0.03);
    CHECK(euler_rates(Attitude{}, gyro) == gyro);
    CHECK(euler_rates(Attitude{}, Vec3::Zero()) == Vec3::Zero());
}

TEST_CASE("euler rates match the kinematic relation at a general attitude") {
    const Attitude att{0.3, -0.4, 1.2};
    const Vec3 gyro(0.05, -0.1, 0.2);
    const Vec3 rates = euler_rates(att, gyro);
    const double sr = std::sin(att.roll), cr = std::cos(att.roll);
    CHECK(rates[0] ==
          doctest::Approx(gyro[0] + (gyro[1] * sr + gyro[2] * cr) * std::tan(att.pitch)));
    CHECK(rates[1] == doctest::Approx(gyro[1] * cr - gyro[2] * sr));
    CHECK(rates[2] == doctest::Approx((gyro[1] * sr + gyro[2] * cr) / std::cos(att.pitch)));
}

TEST_CASE("euler rates refuse the gimbal margin") {
    CHECK(contains(thrown_message<NumericError>([] {
                       euler_rates(Attitude{0.0, M_PI / 2.0 - 1e-9, 0.0}, Vec3::Zero());
                   }),
                   "gimbal"));
    CHECK_THROWS_AS(euler_rates(Attitude{0.0, -M_PI / 2.0 + 1e-9, 0.0}, Vec3::Zero()),
                    NumericError);
    CHECK_NOTHROW(euler_rates(Attitude{0.0, M_PI / 2.0 - 1e-3, 0.0}, Vec3::Zero()));
}

TEST_CASE("a stationary step reproduces the state bit-for-bit") {
    const NavState init = default_init_state();
    const NavState next = ins_step(init, stationary_sample(5000000, init.lat, init.alt), 0.005);
    CHECK(next.lat == init.lat);
    CHECK(next.lon == init.lon);
    CHECK(next.alt == init.alt);
    CHECK(next.vel_ned == Vec3::Zero());
    CHECK(next.att.roll == 0.0);
    CHECK(next.att.pitch == 0.0);
    CHECK(next.att.yaw == 0.0);
    CHECK(next.t_ns == 5000000);
}

TEST_CASE("ins_step validates dt") {
    const NavState init = default_init_state();
    CHECK_THROWS_AS(ins_step(init, stationary_sample(1, init.lat, init.alt), 0.0), UsageError);
    CHECK_THROWS_AS(ins_step(init, stationary_sample(1, init.lat, init.alt), -0.1), UsageError);
}

TEST_CASE("northward velocity advances latitude by the meridian arc") {
    NavState init = default_init_state();
    init.vel_ned = Vec3(1.0, 0.0, 0.0);
    const NavState next = ins_step(init, stationary_sample(1000000000, init.lat, init.alt), 1.0);
    const double expected = 1.0 / (oracle_meridian(init.lat) + init.alt);
    CHECK(next.lat - init.lat == doctest::Approx(expected).epsilon(1e-12));
    CHECK(next.lon == init.lon);
    CHECK(next.alt == init.alt);
    CHECK(next.vel_ned == init.vel_ned);
}

TEST_CASE("polar latitudes are rejected") {
    NavState init = default_init_state();
    init.lat = M_PI / 2.0 - 1e-12;
    CHECK(contains(thrown_message<NumericError>([&] {
                       ins_step(init, stationary_sample(1, init.lat, init.alt), 0.01);
                   }),
                   "polar"));
}

TEST_CASE("propagate yields one state per successor sample") {
    const auto traj = synth_trajectory(SynthProfile::Stationary, 1.0, 10.0, 39.975172, 30.0, 0);
    REQUIRE(traj.size() == 10);
    const auto states = propagate(traj);
    REQUIRE(states.size() == 9);
    CHECK(states.front().t_ns == traj.samples[1].t_ns);
    CHECK(states.back().t_ns == traj.samples.back().t_ns);

    Trajectory two;
    two.samples = {traj.samples[0], traj.samples[1]};
    CHECK(propagate(two).size() == 1);

    Trajectory one;
    one.samples = {traj.samples[0]};
    CHECK_THROWS_AS(propagate(one), DataError);
}

TEST_CASE("stationary propagation has zero drift") {
    const auto traj = synth_trajectory(SynthProfile::Stationary, 10.0, 200.0, 39.975172, 30.0, 0);
    REQUIRE(traj.size() == 2000);
    const NavState init = default_init_state();
    const auto states = propagate(init, traj);
    CHECK(position_error_m(states.back(), init) <= 1e-9);
    CHECK(states.back().vel_ned.norm() <= 1e-12);
}

TEST_CASE("propagate names the failing sample") {
    auto traj = synth_trajectory(SynthProfile::Stationary, 1.0, 10.0, 39.975172, 30.0, 0);
    // A violent pitch-up starting at sample 4 drives |pitch| past the gimbal
    // margin two steps later; the error must carry a sample index.
    for (std::size_t i = 4; i < traj.samples.size(); ++i) traj.samples[i].gyro[1] = 8.0;
    const auto msg = thrown_message<NumericError>([&] { propagate(traj); });
    CHECK(contains(msg, "gimbal"));
    CHECK(contains(msg, "(sample "));
}

TEST_CASE("step halving converges on the turning profile") {
    const double duration = 2.0;
    const double lat = 39.975172, alt = 30.0;
    NavState init = default_init_state();
    init.vel_ned = Vec3(5.0, 0.0, 0.0);  // matches the synthetic turn speed

    const auto run_at = [&](double rate) {
        const auto traj = synth_trajectory(SynthProfile::ConstantTurn, duration + 1.0 / rate,
                                           rate, lat, alt, 0);
        return propagate(init, traj).back();
    };
    const NavState reference = run_at(20000.0);
    const double e_20ms = position_error_m(run_at(50.0), reference);
    const double e_10ms = position_error_m(run_at(100.0), reference);
    const double e_5ms = position_error_m(run_at(200.0), reference);

    CHECK(e_20ms > e_10ms);
    CHECK(e_10ms > e_5ms);
    // Forward Euler is first order: halving dt should roughly halve the error.
    CHECK(e_20ms / e_10ms > 1.7);
    CHECK(e_10ms / e_5ms > 1.7);
}

}  // TEST_SUITE
