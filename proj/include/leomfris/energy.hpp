// Orbit illumination geometry, solar charging, battery recursion and the
// slot energy total used by the energy-efficiency objective.
#pragma once

#include <functional>

#include "leomfris/numerics.hpp"

namespace leomfris::energy {

struct OrbitParams {
  double r_earth = 6.378e6;    // m
  double h_sat = 1.0e6;        // orbit altitude, m
  double phi_sun = 0.5;        // sun elevation wrt orbital plane, rad
  double omega_dot = 7.29e-5;  // angular velocity, rad/s

  void validate() const;
};

struct SolarParams {
  double eta = 0.19;   // panel conversion efficiency
  double psi = 500.0;  // solar flux, W/m^2
  double area = 4.0;   // panel area, m^2

  void validate() const;
};

// theta_rot is the orbital phase angle measured from the shadow midpoint,
// kept in [-pi, pi).
struct BatteryState {
  double energy = 0.0;     // J
  double capacity = 0.0;   // J
  double theta_rot = 0.0;  // rad
};

enum class OrbitPhase { Sun, Shadow };

// Wrap an angle into [-pi, pi).
double wrap_angle(double theta);

// Half-angle of the eclipse arc. Zero when phi_sun exceeds
// asin(r_earth / (r_earth + h_sat)); otherwise
// asin((r_earth^2 cos^2 - (2 r_earth h_sat + h_sat^2) sin^2) /
//      ((r_earth + h_sat) cos)) with the argument clamped to [-1, 1].
// Implemented exactly as written, dimensional oddity included; the numerator
// vanishes at the threshold so the function is continuous there.
double shadow_half_angle(const OrbitParams& op);

// Sunlit iff |theta_rot| >= theta0 (boundary counts as sun).
OrbitPhase phase_of(double theta_rot, double theta0);

// Remaining sunlit time. Requires the current phase to be Sun.
//   theta_rot in [0, pi):  (2*pi - theta0 - theta_rot) / omega_dot
//   theta_rot in [-pi, 0): (-theta0 - theta_rot) / omega_dot
double time_to_shadow(double theta_rot, double theta0, const OrbitParams& op);

// Remaining eclipse time (theta0 - theta_rot) / omega_dot. Requires Shadow.
double time_to_sun(double theta_rot, double theta0, const OrbitParams& op);

// Sum of the two remaining-time formulas evaluated at theta_rot without phase
// preconditions. The model treats this as the period the slot's energy total
// is accounted over; exposed in metrics as t_total.
double orbit_total_time(double theta_rot, double theta0, const OrbitParams& op);

// Solar energy collected over [t, t+delta]:
//   integral of eta * psi * area * sqrt(1 - cos^2(phi_sun) cos^2(theta_rot))
// by the composite trapezoid rule with step <= delta/64. theta_rot_at maps an
// absolute time to the orbital phase angle.
double solar_energy(double t, double delta, const SolarParams& sp,
                    const OrbitParams& op,
                    const std::function<double(double)>& theta_rot_at);

// Average charging power e_sol / t_sun; t_sun must be > 0.
double charging_power(double e_sol, double t_sun);

struct BatteryStepResult {
  BatteryState next;
  double raw_energy = 0.0;  // pre-clamp value, feeds the depletion penalty
};

// One-slot battery recursion:
//   raw  = energy + (p_in*[sun] + p_harvest - p_ris - (p_tr + p_cons)) * duration
//   next = clamp(min(capacity, raw), 0, capacity)
BatteryStepResult battery_step(const BatteryState& bs, double p_in,
                               double p_harvest, double p_ris, double p_tr,
                               double p_cons, OrbitPhase phase,
                               double duration);

// Slot energy total (p_ris + p_tr + p_cons - p_harvest) * t_total. May be
// negative when harvesting exceeds consumption; callers floor the EE
// denominator explicitly.
double total_energy(double p_ris, double p_tr, double p_cons, double p_harvest,
                    double t_total);

}  // namespace leomfris::energy
