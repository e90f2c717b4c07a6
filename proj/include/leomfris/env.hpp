// Multi-agent slot-stepped environment: constellation geometry, per-slot
// channel redraws, action decoding with feasibility projection, the energy
// account and the penalized energy-efficiency reward.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "leomfris/channel.hpp"
#include "leomfris/energy.hpp"
#include "leomfris/mfris.hpp"
#include "leomfris/numerics.hpp"

namespace leomfris::env {

using numerics::CMatrix;
using numerics::Complex;
using numerics::CVector;
using numerics::SeededRng;

enum class Ablation { Full, FixedEh, NoEh, NoAmplify, NoRis };

// Reward weights: a gain on the efficiency term plus one penalty per
// constraint: minimum rate, surface self-sustainability, transmit power
// budget, battery depletion. The efficiency gain rebalances the reward when a
// scenario's energy scale pushes raw efficiency far below the penalty scale.
struct PenaltyWeights {
  double ee = 1.0;
  double rate = 1.0;
  double self_sustain = 10.0;
  double power = 10.0;
  double battery = 0.01;
};

struct Scenario {
  std::size_t num_leo = 2;
  std::size_t num_users = 4;
  std::size_t num_antennas = 4;  // N per LEO
  std::size_t m_h = 4;           // RIS columns
  std::size_t m_v = 4;           // RIS rows

  channel::ChannelParams chan;
  mfris::HarvestParams harvest;
  mfris::RisPowerParams ris_power;
  energy::OrbitParams orbit;
  energy::SolarParams solar;

  double battery_capacity = 9.0e4;  // J
  double sigma_sq = 1e-10;          // user receiver noise power, W
  double sigma_m_sq = 1e-10;        // per-element surface noise power, W
  double beta_max = 4.0;            // amplification ceiling
  double r_min = 0.5;               // per-user rate floor, bits/s/Hz
  double p_budget = 120.0;          // onboard power budget, W
  double p_cons = 90.0;             // LEO operational circuit power, W
  double slot_seconds = 60.0;
  double eps_energy = 1.0;          // EE denominator floor, J

  // Channel distances are expressed in units of distance_scale meters
  // (default 100 km) so that the terrestrial-calibrated pathloss constants
  // produce SINRs in a useful operating range. Documented in the README.
  double distance_scale = 1.0e5;
  double ris_link_distance = 1.0;  // LEO array -> own surface, channel units
  // Power gain applied to the satellite-user direct link only, modeling
  // blockage of the unassisted path. The surface cascade is unaffected, so
  // values below 1 shift serving power toward the reflected path.
  double direct_path_gain = 1.0;
  double state_scale = 1.0;        // observation gain on channel entries
  // Fixed mounting geometry of the onboard surface link.
  channel::SteeringAngles mount{0.9, 0.4, 0.7, 1.1};
  double user_ring_z = 0.2;  // users' off-plane offset, channel units

  PenaltyWeights rho;
  Ablation ablation = Ablation::Full;
  double fixed_alpha = 0.5;         // FixedEh override value
  double element_on_fraction = 1.0; // seeded subset of active elements
  bool quantize_actions = false;    // snap decoded actions to the level grids
  channel::InterferenceMode interference = channel::InterferenceMode::AsWritten;

  std::size_t elements() const { return m_h * m_v; }
  // Round-robin association kept as scenario metadata; every computed
  // quantity sums over all (l,k) pairs as the model is written.
  std::size_t serve_leo(std::size_t k) const { return k % num_leo; }
  std::size_t state_dim() const {
    return 2 * num_antennas * num_users + 2;
  }
  std::size_t action_dim() const {
    return 3 * elements() + 2 * num_antennas * num_users;
  }
  // Transmit power available after the circuit draw.
  double p_avail() const { return p_budget - p_cons; }

  void validate() const;
};

// Flat observation: per-user combined channel (re/im interleaved, user-major)
// then battery fraction then the sunlight flag. Length = state_dim().
using AgentState = std::vector<double>;

struct AgentAction {
  std::vector<double> theta;  // per element, [0, 2*pi)
  std::vector<double> alpha;  // per element, [0, 1]
  std::vector<double> beta;   // per element, [0, beta_max]
  std::vector<CVector> w;     // per user, length num_antennas
};

// Maps raw policy output (box [-1,1]) to a feasible action. Surface controls
// are affine over the box, clamped when a hand-built input exceeds it:
//   theta = pi * (x + 1), alpha = (x + 1) / 2, beta = beta_max * (x + 1) / 2.
// Beams take the trailing 2NK reals (re/im interleaved) as-is, rescaled onto
// the power budget only when it is exceeded.
// Ablation overrides are applied here (FixedEh pins alpha, NoEh pins
// alpha = 1, NoAmplify caps beta at 1, NoRis pins alpha = 1 and beta = 0).
AgentAction decode_action(const std::vector<double>& raw, const Scenario& sc);

// Feasible action drawn directly from the action set, for the random policy.
AgentAction random_action(const Scenario& sc, SeededRng& rng);

struct RewardBreakdown {
  double ee = 0.0;
  std::array<double, 4> c{};      // hinged penalties
  std::array<double, 4> c_raw{};  // unhinged values, logged
  double reward = 0.0;            // ee - sum(rho_i * c_i), exact identity
};

struct SlotAgentMetrics {
  std::vector<double> rates;  // per user
  double rate_sum = 0.0;
  double p_tr = 0.0;
  double p_out = 0.0;       // surface radiated power
  double p_ris = 0.0;       // surface consumption
  double p_harvest = 0.0;   // summed over elements
  double p_in = 0.0;        // solar charging power
  double battery = 0.0;     // post-step stored energy
  double battery_raw = 0.0; // pre-clamp value
  double e_tot = 0.0;       // raw slot energy total (unfloored)
  double t_total = 0.0;
  double sum_g_sq = 0.0;    // sum_k |g_lk|^2, feeds edge election
  energy::OrbitPhase phase = energy::OrbitPhase::Sun;
};

struct StepResult {
  std::vector<AgentState> next;
  std::vector<RewardBreakdown> rewards;
  std::vector<SlotAgentMetrics> metrics;
};

class Environment {
 public:
  explicit Environment(Scenario sc);

  // Full batteries, evenly spaced orbital phases, fresh channel draws, and
  // the element on/off mask for the episode. Returns the initial states
  // (surface configuration starts at zero: g = h^H).
  std::vector<AgentState> reset(std::uint64_t seed);

  // Applies the decoded actions against the current realization, accounts
  // energy, advances the orbit, redraws channels and returns next states.
  StepResult step(const std::vector<AgentAction>& actions);

  const Scenario& scenario() const { return sc_; }
  const channel::ChannelRealization& realization(std::size_t l) const {
    return real_[l];
  }
  double theta_rot(std::size_t l) const { return batteries_[l].theta_rot; }
  const std::vector<std::uint8_t>& element_on() const { return element_on_; }

 private:
  void rebuild_channels();
  std::vector<AgentState> build_states(
      const std::vector<CMatrix>& theta_mats) const;

  Scenario sc_;
  double theta0_ = 0.0;
  SeededRng chan_rng_{0};
  SeededRng noise_rng_{0};
  std::vector<energy::BatteryState> batteries_;
  std::vector<channel::ChannelRealization> real_;
  std::vector<CMatrix> last_theta_;
  std::vector<std::uint8_t> element_on_;
  double time_s_ = 0.0;
};

}  // namespace leomfris::env
