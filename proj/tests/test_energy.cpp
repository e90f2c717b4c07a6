#include <cmath>
#include <numbers>

#include "doctest.h"
#include "leomfris/energy.hpp"
#include "leomfris/numerics.hpp"

using namespace leomfris::energy;
using leomfris::numerics::SeededRng;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(wrap_angle(2.0 * kPi + 0.25) == doctest::Approx(0.25));
  for (double t = -20.0; t < 20.0; t += 0.37) {
    const double w = wrap_angle(t);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    // Same residue mod 2*pi.
    CHECK(std::abs(std::remainder(w - t, 2.0 * kPi)) < 1e-9);
  }
}

TEST_CASE("shadow_half_angle threshold, clamp saturation and continuity") {
  OrbitParams op;  // r_earth 6378 km, h_sat 1000 km
  const double threshold = std::asin(op.r_earth / (op.r_earth + op.h_sat));
  CHECK(threshold == doctest::Approx(1.0444).epsilon(1e-3));

  // Above the threshold the orbit never crosses the shadow cone.
  op.phi_sun = threshold + 1e-6;
  CHECK(shadow_half_angle(op) == 0.0);
  op.phi_sun = 70.0 * kPi / 180.0;
  CHECK(shadow_half_angle(op) == 0.0);

  // At phi = 0 the argument saturates the clamp: asin(1) = pi/2.
  op.phi_sun = 0.0;
  CHECK(shadow_half_angle(op) == doctest::Approx(kPi / 2.0));

  // Approaching the threshold from below the angle falls to zero
  // continuously (the numerator vanishes at the threshold). The clamp
  // saturates to pi/2 until phi is within ~1e-7 rad of the threshold, so the
  // continuity band is probed at finer offsets.
  double prev = kPi;
  for (int i = 1; i <= 11; ++i) {
    op.phi_sun = threshold - std::pow(10.0, -i);
    const double t0 = shadow_half_angle(op);
    CHECK(t0 >= 0.0);
    CHECK(t0 <= prev + 1e-12);
    prev = t0;
  }
  CHECK(prev < 1e-2);
  op.phi_sun = threshold - 1e-3;
  CHECK(shadow_half_angle(op) == doctest::Approx(kPi / 2.0));  // clamped
}

TEST_CASE("phase_of boundary is sunlit") {
  const double theta0 = 0.8;
  CHECK(phase_of(0.8, theta0) == OrbitPhase::Sun);
  CHECK(phase_of(-0.8, theta0) == OrbitPhase::Sun);
  CHECK(phase_of(0.79, theta0) == OrbitPhase::Shadow);
  CHECK(phase_of(2.0, theta0) == OrbitPhase::Sun);
  CHECK(phase_of(0.0, 0.0) == OrbitPhase::Sun);  // no eclipse at theta0 = 0
}

TEST_CASE("time_to_shadow and time_to_sun formulas and preconditions") {
  OrbitParams op;
  const double w = op.omega_dot;

  // theta0 = 0: a full revolution remains from theta_rot = 0.
  CHECK(time_to_shadow(0.0, 0.0, op) == doctest::Approx(2.0 * kPi / w));

  const double theta0 = 0.5;
  CHECK(time_to_shadow(1.0, theta0, op) ==
        doctest::Approx((2.0 * kPi - theta0 - 1.0) / w));
  CHECK(time_to_shadow(-1.0, theta0, op) ==
        doctest::Approx((-theta0 + 1.0) / w));
  CHECK(time_to_sun(0.2, theta0, op) == doctest::Approx((theta0 - 0.2) / w));
  CHECK(time_to_sun(-0.3, theta0, op) == doctest::Approx((theta0 + 0.3) / w));

  CHECK_THROWS_AS((void)time_to_shadow(0.2, theta0, op), std::logic_error);
  CHECK_THROWS_AS((void)time_to_sun(1.0, theta0, op), std::logic_error);
}

TEST_CASE("advancing by the remaining time lands exactly on a boundary") {
  OrbitParams op;
  SeededRng rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    OrbitParams o = op;
    o.phi_sun = rng.uniform() * 1.2;
    const double theta0 = shadow_half_angle(o);
    const double theta = -kPi + 2.0 * kPi * rng.uniform();
    if (phase_of(theta, theta0) == OrbitPhase::Sun) {
      const double t = time_to_shadow(theta, theta0, o);
      REQUIRE(t >= 0.0);
      const double land = theta + o.omega_dot * t;
      // Lands on the trailing shadow boundary -theta0 (mod 2*pi).
      CHECK(std::abs(std::remainder(land + theta0, 2.0 * kPi)) < 1e-9);
    } else {
      const double t = time_to_sun(theta, theta0, o);
      REQUIRE(t >= 0.0);
      const double land = theta + o.omega_dot * t;
      CHECK(std::abs(std::remainder(land - theta0, 2.0 * kPi)) < 1e-9);
    }
  }
}

TEST_CASE("orbit_total_time matches the sum of the two formulas") {
  OrbitParams op;
  const double theta0 = 0.5;
  const double w = op.omega_dot;
  // Positive branch: (2*pi - theta0 - t) + (theta0 - t) = 2*pi - 2t.
  CHECK(orbit_total_time(0.25, theta0, op) ==
        doctest::Approx((2.0 * kPi - 0.5) / w));
  // Negative branch: (-theta0 - t) + (theta0 - t) = -2t.
  CHECK(orbit_total_time(-1.0, theta0, op) == doctest::Approx(2.0 / w));
  // Near wrap the as-written total collapses toward zero.
  CHECK(orbit_total_time(kPi - 1e-6, theta0, op) <
        orbit_total_time(0.1, theta0, op));
}

TEST_CASE("solar_energy quadrature against a fine oracle and pinned value") {
  OrbitParams op;
  SolarParams sp;  // eta 0.19, psi 500, area 4

  // phi = pi/2: integrand is constant eta*psi*area.
  op.phi_sun = kPi / 2.0;
  const auto fixed_rot = [](double) { return 0.3; };
  CHECK(solar_energy(0.0, 60.0, sp, op, fixed_rot) ==
        doctest::Approx(0.19 * 500.0 * 4.0 * 60.0).epsilon(1e-12));

  // Moving orbit against a 65536-step trapezoid oracle.
  op.phi_sun = 0.3;
  const double t0 = 100.0;
  const double delta = 60.0;
  const auto rot = [&](double tau) {
    return wrap_angle(0.2 + op.omega_dot * (tau - t0));
  };
  const double got = solar_energy(t0, delta, sp, op, rot);
  const double cos_phi = std::cos(op.phi_sun);
  const int n = 65536;
  const double h = delta / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double c = std::cos(rot(t0 + h * i));
    const double f =
        sp.eta * sp.psi * sp.area * std::sqrt(1.0 - cos_phi * cos_phi * c * c);
    acc += (i == 0 || i == n) ? 0.5 * f : f;
  }
  acc *= h;
  // 64-step trapezoid vs the fine oracle: h^2 convergence puts the
  // difference below 1e-6 relative on this slowly varying integrand.
  CHECK(got == doctest::Approx(acc).epsilon(1e-6));

  CHECK_THROWS_AS((void)solar_energy(0.0, 0.0, sp, op, fixed_rot),
                  std::invalid_argument);
}

TEST_CASE("charging_power is the ratio with a positive-time guard") {
  CHECK(charging_power(22800.0, 60.0) == doctest::Approx(380.0));
  CHECK_THROWS_AS((void)charging_power(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)charging_power(1.0, -5.0), std::invalid_argument);
}

TEST_CASE("battery_step recursion, cap, floor and raw reporting") {
  BatteryState bs;
  bs.energy = 100.0;
  bs.capacity = 9.0e4;
  bs.theta_rot = 0.1;

  SUBCASE("plain drain") {
    // Net -1 W for 60 s from 100 J leaves 40 J, no clamping.
    const auto r = battery_step(bs, 0.0, 0.0, 0.5, 0.25, 0.25,
                                OrbitPhase::Shadow, 60.0);
    CHECK(r.raw_energy == doctest::Approx(40.0));
    CHECK(r.next.energy == doctest::Approx(40.0));
    CHECK(r.next.theta_rot == bs.theta_rot);
  }
  SUBCASE("sun gate on charging power") {
    const auto sun = battery_step(bs, 2.0, 0.0, 0.5, 0.25, 0.25,
                                  OrbitPhase::Sun, 60.0);
    CHECK(sun.next.energy == doctest::Approx(100.0 + 60.0));
    const auto shd = battery_step(bs, 2.0, 0.0, 0.5, 0.25, 0.25,
                                  OrbitPhase::Shadow, 60.0);
    CHECK(shd.next.energy == doctest::Approx(40.0));
  }
  SUBCASE("capacity cap") {
    BatteryState full = bs;
    full.energy = 8.9999e4;
    const auto r = battery_step(full, 1000.0, 0.0, 0.0, 0.0, 0.0,
                                OrbitPhase::Sun, 60.0);
    CHECK(r.raw_energy > full.capacity);
    CHECK(r.next.energy == full.capacity);
  }
  SUBCASE("floor clamp keeps the raw value visible") {
    BatteryState low = bs;
    low.energy = 10.0;
    const auto r = battery_step(low, 0.0, 0.0, 0.0, 1.0, 0.0,
                                OrbitPhase::Shadow, 60.0);
    CHECK(r.raw_energy == doctest::Approx(-50.0));
    CHECK(r.next.energy == 0.0);
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS((void)battery_step(bs, 0, 0, 0, 0, 0, OrbitPhase::Sun, 0.0),
                    std::invalid_argument);
    BatteryState bad = bs;
    bad.capacity = 0.0;
    CHECK_THROWS_AS(
        (void)battery_step(bad, 0, 0, 0, 0, 0, OrbitPhase::Sun, 1.0),
        std::invalid_argument);
  }
}

TEST_CASE("total_energy sign follows net consumption") {
  CHECK(total_energy(10.0, 30.0, 90.0, 0.4, 100.0) ==
        doctest::Approx(129.6 * 100.0));
  CHECK(total_energy(1.0, 0.0, 0.0, 5.0, 10.0) == doctest::Approx(-40.0));
  CHECK(total_energy(1.0, 1.0, 1.0, 3.0, 50.0) == 0.0);
}
