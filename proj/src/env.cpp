#include "leomfris/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace leomfris::env {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

Vec3 user_position(const Scenario& sc, std::size_t k) {
  // Users sit on an earth-radius ring, evenly spaced in azimuth, slightly
  // off the orbital plane so link distances never vanish.
  const double radius = sc.orbit.r_earth / sc.distance_scale;
  const double az = -std::numbers::pi +
                    kTwoPi * static_cast<double>(k) /
                        static_cast<double>(sc.num_users);
  return {radius * std::cos(az), radius * std::sin(az), sc.user_ring_z};
}

Vec3 leo_position(const Scenario& sc, double theta_rot) {
  const double radius =
      (sc.orbit.r_earth + sc.orbit.h_sat) / sc.distance_scale;
  return {radius * std::cos(theta_rot), radius * std::sin(theta_rot), 0.0};
}

struct LinkGeometry {
  double distance = 0.0;  // channel units
  double phi = 0.0;       // polar angle of the departure direction
  double theta = 0.0;     // azimuth of the departure direction
};

LinkGeometry link_geometry(const Vec3& from, const Vec3& to) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  const double dz = to.z - from.z;
  LinkGeometry g;
  g.distance = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (g.distance <= 0.0) throw std::logic_error("coincident link endpoints");
  g.phi = std::acos(std::clamp(dz / g.distance, -1.0, 1.0));
  g.theta = std::atan2(dy, dx);
  return g;
}

double snap_to_grid(double v, double lo, double hi, std::size_t levels) {
  const double step = (hi - lo) / static_cast<double>(levels - 1);
  const double idx = std::round((v - lo) / step);
  return std::clamp(lo + idx * step, lo, hi);
}

void apply_ablation(AgentAction& a, const Scenario& sc) {
  switch (sc.ablation) {
    case Ablation::Full:
      break;
    case Ablation::FixedEh:
      std::fill(a.alpha.begin(), a.alpha.end(), sc.fixed_alpha);
      break;
    case Ablation::NoEh:
      std::fill(a.alpha.begin(), a.alpha.end(), 1.0);
      break;
    case Ablation::NoAmplify:
      for (double& b : a.beta) b = std::min(b, 1.0);
      break;
    case Ablation::NoRis:
      std::fill(a.alpha.begin(), a.alpha.end(), 1.0);
      std::fill(a.beta.begin(), a.beta.end(), 0.0);
      break;
  }
}

void project_power(AgentAction& a, const Scenario& sc) {
  double p = 0.0;
  for (const CVector& wk : a.w) p += numerics::norm_sq(wk);
  const double avail = sc.p_avail();
  if (p > avail) {
    const double scale = std::sqrt(avail / p);
    for (CVector& wk : a.w)
      for (Complex& c : wk) c *= scale;
  }
}

}  // namespace

void Scenario::validate() const {
  if (num_leo == 0) throw std::invalid_argument("num_leo must be >= 1");
  if (num_users == 0) throw std::invalid_argument("num_users must be >= 1");
  if (num_antennas == 0)
    throw std::invalid_argument("num_antennas must be >= 1");
  if (m_h == 0 || m_v == 0)
    throw std::invalid_argument("surface grid dimensions must be >= 1");
  chan.validate();
  harvest.validate();
  ris_power.validate();
  orbit.validate();
  solar.validate();
  if (battery_capacity <= 0.0)
    throw std::invalid_argument("battery_capacity must be > 0");
  if (sigma_sq <= 0.0) throw std::invalid_argument("sigma_sq must be > 0");
  if (sigma_m_sq < 0.0) throw std::invalid_argument("sigma_m_sq must be >= 0");
  if (beta_max <= 0.0) throw std::invalid_argument("beta_max must be > 0");
  if (r_min < 0.0) throw std::invalid_argument("r_min must be >= 0");
  if (p_cons < 0.0) throw std::invalid_argument("p_cons must be >= 0");
  if (p_budget < p_cons)
    throw std::invalid_argument("p_budget must be >= p_cons");
  if (slot_seconds <= 0.0)
    throw std::invalid_argument("slot_seconds must be > 0");
  if (eps_energy <= 0.0) throw std::invalid_argument("eps_energy must be > 0");
  if (distance_scale <= 0.0)
    throw std::invalid_argument("distance_scale must be > 0");
  if (ris_link_distance <= 0.0)
    throw std::invalid_argument("ris_link_distance must be > 0");
  if (element_on_fraction <= 0.0 || element_on_fraction > 1.0)
    throw std::invalid_argument("element_on_fraction must be in (0, 1]");
  if (fixed_alpha < 0.0 || fixed_alpha > 1.0)
    throw std::invalid_argument("fixed_alpha must be in [0, 1]");
  if (rho.ee < 0.0 || rho.rate < 0.0 || rho.self_sustain < 0.0 ||
      rho.power < 0.0 || rho.battery < 0.0)
    throw std::invalid_argument("reward weights must be >= 0");
  if (direct_path_gain < 0.0)
    throw std::invalid_argument("direct_path_gain must be >= 0");
}

AgentAction decode_action(const std::vector<double>& raw, const Scenario& sc) {
  const std::size_t m = sc.elements();
  const std::size_t nk = sc.num_antennas * sc.num_users;
  if (raw.size() != sc.action_dim())
    throw std::invalid_argument("raw action has wrong length");

  AgentAction a;
  a.theta.resize(m);
  a.alpha.resize(m);
  a.beta.resize(m);
  // Policies emit [-1,1]; affine maps span each physical range end to end.
  // Out-of-box inputs (hand-built probes) are clamped, not wrapped.
  const auto unit = [](double x) {
    return 0.5 * (std::clamp(x, -1.0, 1.0) + 1.0);
  };
  for (std::size_t i = 0; i < m; ++i) a.theta[i] = kTwoPi * unit(raw[i]);
  for (std::size_t i = 0; i < m; ++i) a.alpha[i] = unit(raw[m + i]);
  for (std::size_t i = 0; i < m; ++i)
    a.beta[i] = sc.beta_max * unit(raw[2 * m + i]);

  a.w.resize(sc.num_users, CVector(sc.num_antennas));
  for (std::size_t k = 0; k < sc.num_users; ++k)
    for (std::size_t n = 0; n < sc.num_antennas; ++n) {
      const std::size_t base = 3 * m + 2 * (k * sc.num_antennas + n);
      a.w[k][n] = Complex(raw[base], raw[base + 1]);
    }

  if (sc.quantize_actions) {
    for (std::size_t i = 0; i < m; ++i) {
      // Phase wraps: snap on the circle, then fold 2*pi back to 0.
      const double step = kTwoPi / static_cast<double>(sc.ris_power.levels_theta);
      double snapped = std::round(a.theta[i] / step) * step;
      if (snapped >= kTwoPi) snapped -= kTwoPi;
      a.theta[i] = snapped;
      a.alpha[i] = snap_to_grid(a.alpha[i], 0.0, 1.0, sc.ris_power.levels_alpha);
      a.beta[i] =
          snap_to_grid(a.beta[i], 0.0, sc.beta_max, sc.ris_power.levels_beta);
    }
  }

  apply_ablation(a, sc);
  project_power(a, sc);
  (void)nk;
  return a;
}

AgentAction random_action(const Scenario& sc, SeededRng& rng) {
  const std::size_t m = sc.elements();
  AgentAction a;
  a.theta.resize(m);
  a.alpha.resize(m);
  a.beta.resize(m);
  for (std::size_t i = 0; i < m; ++i) a.theta[i] = kTwoPi * rng.uniform();
  for (std::size_t i = 0; i < m; ++i) a.alpha[i] = rng.uniform();
  for (std::size_t i = 0; i < m; ++i) a.beta[i] = sc.beta_max * rng.uniform();

  // Gaussian direction scaled to a uniformly drawn total transmit power.
  a.w.resize(sc.num_users, CVector(sc.num_antennas));
  double p = 0.0;
  for (std::size_t k = 0; k < sc.num_users; ++k)
    for (std::size_t n = 0; n < sc.num_antennas; ++n) {
      a.w[k][n] = Complex(rng.gaussian(), rng.gaussian());
      p += std::norm(a.w[k][n]);
    }
  const double target = rng.uniform() * sc.p_avail();
  const double scale = p > 0.0 ? std::sqrt(target / p) : 0.0;
  for (CVector& wk : a.w)
    for (Complex& c : wk) c *= scale;

  apply_ablation(a, sc);
  project_power(a, sc);
  return a;
}

Environment::Environment(Scenario sc) : sc_(std::move(sc)) {
  sc_.validate();
  theta0_ = energy::shadow_half_angle(sc_.orbit);
}

std::vector<AgentState> Environment::reset(std::uint64_t seed) {
  SeededRng root(seed);
  chan_rng_ = root.substream(1);
  noise_rng_ = root.substream(2);
  SeededRng mask_rng = root.substream(3);

  batteries_.assign(sc_.num_leo, energy::BatteryState{});
  for (std::size_t l = 0; l < sc_.num_leo; ++l) {
    batteries_[l].capacity = sc_.battery_capacity;
    batteries_[l].energy = sc_.battery_capacity;
    batteries_[l].theta_rot = energy::wrap_angle(
        -std::numbers::pi +
        kTwoPi * static_cast<double>(l) / static_cast<double>(sc_.num_leo));
  }

  // Episode-fixed subset of powered elements: partial Fisher-Yates draw of
  // ceil(fraction * M) indices.
  const std::size_t m = sc_.elements();
  const auto active = static_cast<std::size_t>(
      std::ceil(sc_.element_on_fraction * static_cast<double>(m)));
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  for (std::size_t i = 0; i < active; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(mask_rng.uniform() *
                                     static_cast<double>(m - i));
    std::swap(idx[i], idx[std::min(j, m - 1)]);
  }
  element_on_.assign(m, 0);
  for (std::size_t i = 0; i < active; ++i) element_on_[idx[i]] = 1;

  time_s_ = 0.0;
  last_theta_.assign(sc_.num_leo, CMatrix(m, m));
  rebuild_channels();
  return build_states(last_theta_);
}

void Environment::rebuild_channels() {
  real_.assign(sc_.num_leo, channel::ChannelRealization{});
  for (std::size_t l = 0; l < sc_.num_leo; ++l) {
    channel::ChannelRealization& cr = real_[l];
    const CMatrix los = channel::los_matrix(sc_.m_h, sc_.m_v, sc_.num_antennas,
                                            sc_.mount, sc_.chan);
    cr.big_h = channel::rician(los, sc_.ris_link_distance, sc_.chan, chan_rng_);

    const Vec3 sat = leo_position(sc_, batteries_[l].theta_rot);
    cr.h.resize(sc_.num_users);
    cr.r.resize(sc_.num_users);
    for (std::size_t k = 0; k < sc_.num_users; ++k) {
      const LinkGeometry g = link_geometry(sat, user_position(sc_, k));
      const CVector los_h =
          channel::los_vector(sc_.num_antennas, g.phi, g.theta, sc_.chan);
      cr.h[k] = channel::rician(los_h, g.distance, sc_.chan, chan_rng_);
      // Blockage on the unassisted path; drawn first so the stream layout
      // is identical across gain values.
      const double hg = std::sqrt(sc_.direct_path_gain);
      for (Complex& c : cr.h[k]) c *= hg;
      // The surface rides on the satellite, so its user links share the
      // satellite's departure geometry.
      const CVector los_r =
          channel::los_vector(sc_.elements(), g.phi, g.theta, sc_.chan);
      cr.r[k] = channel::rician(los_r, g.distance, sc_.chan, chan_rng_);
    }
  }
}

std::vector<AgentState> Environment::build_states(
    const std::vector<CMatrix>& theta_mats) const {
  std::vector<AgentState> states(sc_.num_leo);
  for (std::size_t l = 0; l < sc_.num_leo; ++l) {
    AgentState& s = states[l];
    s.reserve(sc_.state_dim());
    for (std::size_t k = 0; k < sc_.num_users; ++k) {
      const CVector g = channel::combined_channel(real_[l].h[k], real_[l].r[k],
                                                  theta_mats[l], real_[l].big_h);
      for (const Complex& c : g) {
        s.push_back(sc_.state_scale * c.real());
        s.push_back(sc_.state_scale * c.imag());
      }
    }
    s.push_back(batteries_[l].energy / batteries_[l].capacity);
    s.push_back(
        energy::phase_of(batteries_[l].theta_rot, theta0_) ==
                energy::OrbitPhase::Sun
            ? 1.0
            : 0.0);
  }
  return states;
}

StepResult Environment::step(const std::vector<AgentAction>& actions) {
  if (actions.size() != sc_.num_leo)
    throw std::invalid_argument("one action per satellite required");
  const std::size_t m = sc_.elements();
  const bool no_ris = sc_.ablation == Ablation::NoRis;

  // Element mask and surface configuration. A powered-off element neither
  // reflects (beta = 0) nor harvests (alpha = 1).
  std::vector<mfris::MfRisConfig> cfg(sc_.num_leo);
  std::vector<CMatrix> theta_mats(sc_.num_leo);
  for (std::size_t l = 0; l < sc_.num_leo; ++l) {
    cfg[l].alpha = actions[l].alpha;
    cfg[l].beta = actions[l].beta;
    cfg[l].theta = actions[l].theta;
    if (cfg[l].elements() != m)
      throw std::invalid_argument("action element count mismatch");
    for (std::size_t i = 0; i < m; ++i)
      if (!element_on_[i]) {
        cfg[l].alpha[i] = 1.0;
        cfg[l].beta[i] = 0.0;
      }
    cfg[l].validate();
    theta_mats[l] = mfris::config_matrix(cfg[l]);
  }

  // Combined channels and SINRs across every satellite-user pair.
  std::vector<std::vector<CVector>> g(sc_.num_leo);
  std::vector<std::vector<CVector>> w(sc_.num_leo);
  CVector w_sum(sc_.num_antennas, Complex(0.0, 0.0));
  for (std::size_t l = 0; l < sc_.num_leo; ++l) {
    g[l].resize(sc_.num_users);
    w[l] = actions[l].w;
    if (w[l].size() != sc_.num_users)
      throw std::invalid_argument("action beam count mismatch");
    for (std::size_t k = 0; k < sc_.num_users; ++k) {
      if (w[l][k].size() != sc_.num_antennas)
        throw std::invalid_argument("beamformer length mismatch");
      g[l][k] = channel::combined_channel(real_[l].h[k], real_[l].r[k],
                                          theta_mats[l], real_[l].big_h);
      for (std::size_t n = 0; n < sc_.num_antennas; ++n)
        w_sum[n] += w[l][k][n];
    }
  }

  StepResult out;
  out.rewards.resize(sc_.num_leo);
  out.metrics.resize(sc_.num_leo);

  for (std::size_t l = 0; l < sc_.num_leo; ++l) {
    SlotAgentMetrics& mt = out.metrics[l];
    mt.rates.resize(sc_.num_users);
    for (std::size_t k = 0; k < sc_.num_users; ++k) {
      mt.rates[k] = channel::rate(
          channel::sinr(g, w, sc_.sigma_sq, l, k, sc_.interference));
      mt.rate_sum += mt.rates[k];
      mt.sum_g_sq += numerics::norm_sq(g[l][k]);
    }
    for (std::size_t k = 0; k < sc_.num_users; ++k)
      mt.p_tr += numerics::norm_sq(w[l][k]);

    // Harvest: the global beam superposition arrives at each element through
    // this satellite's own mounted channel, plus per-element surface noise.
    const CVector noise =
        numerics::sample_cgauss(noise_rng_, m, sc_.sigma_m_sq);
    if (!no_ris) {
      for (std::size_t i = 0; i < m; ++i) {
        const double p_rf = mfris::received_rf_power(
            i, real_[l].big_h, w_sum, cfg[l].alpha[i], noise[i]);
        mt.p_harvest += mfris::harvested_power(p_rf, sc_.harvest);
      }
      mt.p_out = mfris::ris_output_power(theta_mats[l], real_[l].big_h, w[l],
                                         sc_.sigma_m_sq);
      mt.p_ris = mfris::ris_power_consumption(cfg[l], mt.p_out, sc_.ris_power);
    }

    const double theta_rot = batteries_[l].theta_rot;
    mt.phase = energy::phase_of(theta_rot, theta0_);
    mt.t_total = energy::orbit_total_time(theta_rot, theta0_, sc_.orbit);
    if (mt.phase == energy::OrbitPhase::Sun) {
      const double t_sun =
          energy::time_to_shadow(theta_rot, theta0_, sc_.orbit);
      if (t_sun > 0.0) {
        const double t_now = time_s_;
        const double omega = sc_.orbit.omega_dot;
        const double e_sol = energy::solar_energy(
            t_now, t_sun, sc_.solar, sc_.orbit,
            [theta_rot, t_now, omega](double t) {
              return theta_rot + omega * (t - t_now);
            });
        mt.p_in = energy::charging_power(e_sol, t_sun);
      }
    }

    const energy::BatteryStepResult bs = energy::battery_step(
        batteries_[l], mt.p_in, mt.p_harvest, mt.p_ris, mt.p_tr, sc_.p_cons,
        mt.phase, sc_.slot_seconds);
    mt.battery = bs.next.energy;
    mt.battery_raw = bs.raw_energy;
    mt.e_tot = energy::total_energy(mt.p_ris, mt.p_tr, sc_.p_cons,
                                    mt.p_harvest, mt.t_total);

    RewardBreakdown& rb = out.rewards[l];
    rb.ee = mt.rate_sum / std::max(mt.e_tot, sc_.eps_energy);
    rb.c_raw[0] = static_cast<double>(sc_.num_users) * sc_.r_min - mt.rate_sum;
    rb.c_raw[1] = mt.p_ris - mt.p_harvest;
    rb.c_raw[2] = mt.p_tr + sc_.p_cons - sc_.p_budget;
    rb.c_raw[3] = -bs.raw_energy;
    for (std::size_t i = 0; i < 4; ++i) rb.c[i] = std::max(0.0, rb.c_raw[i]);
    rb.reward = sc_.rho.ee * rb.ee - sc_.rho.rate * rb.c[0] -
                sc_.rho.self_sustain * rb.c[1] - sc_.rho.power * rb.c[2] -
                sc_.rho.battery * rb.c[3];

    batteries_[l] = bs.next;
  }

  // Advance the orbit, redraw fading, and observe through the configuration
  // that was just applied.
  for (std::size_t l = 0; l < sc_.num_leo; ++l)
    batteries_[l].theta_rot = energy::wrap_angle(
        batteries_[l].theta_rot + sc_.orbit.omega_dot * sc_.slot_seconds);
  time_s_ += sc_.slot_seconds;
  rebuild_channels();
  last_theta_ = theta_mats;
  out.next = build_states(last_theta_);
  return out;
}

}  // namespace leomfris::env
