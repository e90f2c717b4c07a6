#include "leomfris/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace leomfris::energy {

namespace {
constexpr double kPi = std::numbers::pi;
}

void OrbitParams::validate() const {
  if (r_earth <= 0.0 || h_sat <= 0.0 || omega_dot <= 0.0)
    throw std::invalid_argument("OrbitParams: r_earth, h_sat, omega_dot must be > 0");
}

void SolarParams::validate() const {
  if (eta < 0.0 || psi < 0.0 || area < 0.0)
    throw std::invalid_argument("SolarParams: negative parameter");
}

double wrap_angle(double theta) {
  const double two_pi = 2.0 * kPi;
  double t = std::fmod(theta + kPi, two_pi);
  if (t < 0.0) t += two_pi;
  return t - kPi;
}

double shadow_half_angle(const OrbitParams& op) {
  op.validate();
  const double threshold = std::asin(op.r_earth / (op.r_earth + op.h_sat));
  if (op.phi_sun > threshold) return 0.0;
  const double c = std::cos(op.phi_sun);
  const double s = std::sin(op.phi_sun);
  const double num = op.r_earth * op.r_earth * c * c -
                     (2.0 * op.r_earth * op.h_sat + op.h_sat * op.h_sat) * s * s;
  const double arg = num / ((op.r_earth + op.h_sat) * c);
  return std::asin(std::clamp(arg, -1.0, 1.0));
}

OrbitPhase phase_of(double theta_rot, double theta0) {
  return std::abs(theta_rot) >= theta0 ? OrbitPhase::Sun : OrbitPhase::Shadow;
}

double time_to_shadow(double theta_rot, double theta0, const OrbitParams& op) {
  op.validate();
  if (phase_of(theta_rot, theta0) != OrbitPhase::Sun)
    throw std::logic_error("time_to_shadow: not in sun phase");
  if (theta_rot >= 0.0)
    return (2.0 * kPi - theta0 - theta_rot) / op.omega_dot;
  return (-theta0 - theta_rot) / op.omega_dot;
}

double time_to_sun(double theta_rot, double theta0, const OrbitParams& op) {
  op.validate();
  if (phase_of(theta_rot, theta0) != OrbitPhase::Shadow)
    throw std::logic_error("time_to_sun: not in shadow phase");
  return (theta0 - theta_rot) / op.omega_dot;
}

double orbit_total_time(double theta_rot, double theta0,
                        const OrbitParams& op) {
  op.validate();
  const double t_sun = theta_rot >= 0.0
                           ? (2.0 * kPi - theta0 - theta_rot) / op.omega_dot
                           : (-theta0 - theta_rot) / op.omega_dot;
  const double t_shd = (theta0 - theta_rot) / op.omega_dot;
  return t_sun + t_shd;
}

double solar_energy(double t, double delta, const SolarParams& sp,
                    const OrbitParams& op,
                    const std::function<double(double)>& theta_rot_at) {
  sp.validate();
  op.validate();
  if (delta <= 0.0)
    throw std::invalid_argument("solar_energy: delta must be > 0");
  const double cos_phi = std::cos(op.phi_sun);
  const auto integrand = [&](double tau) {
    const double c = std::cos(theta_rot_at(tau));
    const double arg = 1.0 - cos_phi * cos_phi * c * c;
    return sp.eta * sp.psi * sp.area * std::sqrt(std::max(arg, 0.0));
  };
  constexpr int kSteps = 64;  // step = delta/64 satisfies the resolution bound
  const double h = delta / kSteps;
  double acc = 0.5 * (integrand(t) + integrand(t + delta));
  for (int i = 1; i < kSteps; ++i) acc += integrand(t + h * i);
  return acc * h;
}

double charging_power(double e_sol, double t_sun) {
  if (t_sun <= 0.0)
    throw std::invalid_argument("charging_power: t_sun must be > 0");
  return e_sol / t_sun;
}

BatteryStepResult battery_step(const BatteryState& bs, double p_in,
                               double p_harvest, double p_ris, double p_tr,
                               double p_cons, OrbitPhase phase,
                               double duration) {
  if (duration <= 0.0)
    throw std::invalid_argument("battery_step: duration must be > 0");
  if (bs.capacity <= 0.0)
    throw std::invalid_argument("battery_step: capacity must be > 0");
  const double sun = (phase == OrbitPhase::Sun) ? 1.0 : 0.0;
  const double net = p_in * sun + p_harvest - p_ris - (p_tr + p_cons);
  const double raw = bs.energy + net * duration;
  BatteryStepResult out;
  out.raw_energy = raw;
  out.next = bs;
  out.next.energy = std::max(0.0, std::min(bs.capacity, raw));
  return out;
}

double total_energy(double p_ris, double p_tr, double p_cons, double p_harvest,
                    double t_total) {
  return (p_ris + p_tr + p_cons - p_harvest) * t_total;
}

}  // namespace leomfris::energy
