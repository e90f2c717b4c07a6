#include "leomfris/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace leomfris::config {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

double parse_f64(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) fail(line, "trailing characters in number '" + v + "'");
    return d;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    fail(line, "expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(line, "expected true/false, got '" + v + "'");
}

std::vector<std::size_t> parse_size_list(const std::string& v, int line) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty entry in list '" + v + "'");
    out.push_back(static_cast<std::size_t>(parse_u64(item, line)));
  }
  if (out.empty()) fail(line, "expected a comma-separated list, got '" + v + "'");
  return out;
}

env::Ablation parse_ablation(const std::string& v, int line) {
  if (v == "full") return env::Ablation::Full;
  if (v == "fixed_eh") return env::Ablation::FixedEh;
  if (v == "no_eh") return env::Ablation::NoEh;
  if (v == "no_amplify") return env::Ablation::NoAmplify;
  if (v == "no_ris") return env::Ablation::NoRis;
  fail(line, "unknown ablation '" + v +
                 "' (full|fixed_eh|no_eh|no_amplify|no_ris)");
}

channel::InterferenceMode parse_interference(const std::string& v, int line) {
  if (v == "as_written") return channel::InterferenceMode::AsWritten;
  if (v == "all_users") return channel::InterferenceMode::AllUsers;
  fail(line, "unknown interference mode '" + v + "' (as_written|all_users)");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    const auto f64 = [&t](const std::string& key, auto member) {
      t[key] = [member](ExperimentConfig& c, const std::string& v, int line) {
        member(c) = parse_f64(v, line);
      };
    };
    const auto u64 = [&t](const std::string& key, auto member) {
      t[key] = [member](ExperimentConfig& c, const std::string& v, int line) {
        member(c) = static_cast<std::size_t>(parse_u64(v, line));
      };
    };
    const auto flag = [&t](const std::string& key, auto member) {
      t[key] = [member](ExperimentConfig& c, const std::string& v, int line) {
        member(c) = parse_bool(v, line);
      };
    };

    t["algorithm"] = [](ExperimentConfig& c, const std::string& v, int) {
      c.algorithm = v;
    };
    u64("episodes", [](ExperimentConfig& c) -> std::size_t& { return c.episodes; });
    u64("slots", [](ExperimentConfig& c) -> std::size_t& { return c.slots; });
    u64("num_seeds",
        [](ExperimentConfig& c) -> std::size_t& { return c.num_seeds; });
    t["base_seed"] = [](ExperimentConfig& c, const std::string& v, int line) {
      c.base_seed = parse_u64(v, line);
    };
    t["out_dir"] = [](ExperimentConfig& c, const std::string& v, int) {
      c.out_dir = v;
    };

    u64("scenario.num_leo",
        [](ExperimentConfig& c) -> std::size_t& { return c.scenario.num_leo; });
    u64("scenario.num_users", [](ExperimentConfig& c) -> std::size_t& {
      return c.scenario.num_users;
    });
    u64("scenario.num_antennas", [](ExperimentConfig& c) -> std::size_t& {
      return c.scenario.num_antennas;
    });
    u64("scenario.m_h",
        [](ExperimentConfig& c) -> std::size_t& { return c.scenario.m_h; });
    u64("scenario.m_v",
        [](ExperimentConfig& c) -> std::size_t& { return c.scenario.m_v; });

    f64("scenario.chan.h0",
        [](ExperimentConfig& c) -> double& { return c.scenario.chan.h0; });
    f64("scenario.chan.k0",
        [](ExperimentConfig& c) -> double& { return c.scenario.chan.k0; });
    f64("scenario.chan.beta0",
        [](ExperimentConfig& c) -> double& { return c.scenario.chan.beta0; });
    f64("scenario.chan.lambda",
        [](ExperimentConfig& c) -> double& { return c.scenario.chan.lambda; });
    f64("scenario.chan.d_elem",
        [](ExperimentConfig& c) -> double& { return c.scenario.chan.d_elem; });

    f64("scenario.harvest.z",
        [](ExperimentConfig& c) -> double& { return c.scenario.harvest.z; });
    f64("scenario.harvest.a",
        [](ExperimentConfig& c) -> double& { return c.scenario.harvest.a; });
    f64("scenario.harvest.q",
        [](ExperimentConfig& c) -> double& { return c.scenario.harvest.q; });

    u64("scenario.ris_power.levels_alpha",
        [](ExperimentConfig& c) -> std::size_t& {
          return c.scenario.ris_power.levels_alpha;
        });
    u64("scenario.ris_power.levels_beta",
        [](ExperimentConfig& c) -> std::size_t& {
          return c.scenario.ris_power.levels_beta;
        });
    u64("scenario.ris_power.levels_theta",
        [](ExperimentConfig& c) -> std::size_t& {
          return c.scenario.ris_power.levels_theta;
        });
    f64("scenario.ris_power.p_pin", [](ExperimentConfig& c) -> double& {
      return c.scenario.ris_power.p_pin;
    });
    f64("scenario.ris_power.p_c",
        [](ExperimentConfig& c) -> double& { return c.scenario.ris_power.p_c; });
    f64("scenario.ris_power.xi",
        [](ExperimentConfig& c) -> double& { return c.scenario.ris_power.xi; });

    f64("scenario.orbit.r_earth",
        [](ExperimentConfig& c) -> double& { return c.scenario.orbit.r_earth; });
    f64("scenario.orbit.h_sat",
        [](ExperimentConfig& c) -> double& { return c.scenario.orbit.h_sat; });
    f64("scenario.orbit.phi_sun",
        [](ExperimentConfig& c) -> double& { return c.scenario.orbit.phi_sun; });
    f64("scenario.orbit.omega_dot", [](ExperimentConfig& c) -> double& {
      return c.scenario.orbit.omega_dot;
    });

    f64("scenario.solar.eta",
        [](ExperimentConfig& c) -> double& { return c.scenario.solar.eta; });
    f64("scenario.solar.psi",
        [](ExperimentConfig& c) -> double& { return c.scenario.solar.psi; });
    f64("scenario.solar.area",
        [](ExperimentConfig& c) -> double& { return c.scenario.solar.area; });

    f64("scenario.battery_capacity", [](ExperimentConfig& c) -> double& {
      return c.scenario.battery_capacity;
    });
    f64("scenario.sigma_sq",
        [](ExperimentConfig& c) -> double& { return c.scenario.sigma_sq; });
    f64("scenario.sigma_m_sq",
        [](ExperimentConfig& c) -> double& { return c.scenario.sigma_m_sq; });
    f64("scenario.beta_max",
        [](ExperimentConfig& c) -> double& { return c.scenario.beta_max; });
    f64("scenario.r_min",
        [](ExperimentConfig& c) -> double& { return c.scenario.r_min; });
    f64("scenario.p_budget",
        [](ExperimentConfig& c) -> double& { return c.scenario.p_budget; });
    f64("scenario.p_cons",
        [](ExperimentConfig& c) -> double& { return c.scenario.p_cons; });
    f64("scenario.slot_seconds",
        [](ExperimentConfig& c) -> double& { return c.scenario.slot_seconds; });
    f64("scenario.eps_energy",
        [](ExperimentConfig& c) -> double& { return c.scenario.eps_energy; });
    f64("scenario.distance_scale", [](ExperimentConfig& c) -> double& {
      return c.scenario.distance_scale;
    });
    f64("scenario.ris_link_distance", [](ExperimentConfig& c) -> double& {
      return c.scenario.ris_link_distance;
    });
    f64("scenario.direct_path_gain", [](ExperimentConfig& c) -> double& {
      return c.scenario.direct_path_gain;
    });
    f64("scenario.state_scale",
        [](ExperimentConfig& c) -> double& { return c.scenario.state_scale; });
    f64("scenario.user_ring_z",
        [](ExperimentConfig& c) -> double& { return c.scenario.user_ring_z; });

    f64("scenario.mount.phi_t",
        [](ExperimentConfig& c) -> double& { return c.scenario.mount.phi_t; });
    f64("scenario.mount.theta_t",
        [](ExperimentConfig& c) -> double& { return c.scenario.mount.theta_t; });
    f64("scenario.mount.phi_r",
        [](ExperimentConfig& c) -> double& { return c.scenario.mount.phi_r; });
    f64("scenario.mount.theta_r",
        [](ExperimentConfig& c) -> double& { return c.scenario.mount.theta_r; });

    f64("scenario.rho.ee",
        [](ExperimentConfig& c) -> double& { return c.scenario.rho.ee; });
    f64("scenario.rho.rate",
        [](ExperimentConfig& c) -> double& { return c.scenario.rho.rate; });
    f64("scenario.rho.self_sustain", [](ExperimentConfig& c) -> double& {
      return c.scenario.rho.self_sustain;
    });
    f64("scenario.rho.power",
        [](ExperimentConfig& c) -> double& { return c.scenario.rho.power; });
    f64("scenario.rho.battery",
        [](ExperimentConfig& c) -> double& { return c.scenario.rho.battery; });

    t["scenario.ablation"] = [](ExperimentConfig& c, const std::string& v,
                                int line) {
      c.scenario.ablation = parse_ablation(v, line);
    };
    f64("scenario.fixed_alpha",
        [](ExperimentConfig& c) -> double& { return c.scenario.fixed_alpha; });
    f64("scenario.element_on_fraction", [](ExperimentConfig& c) -> double& {
      return c.scenario.element_on_fraction;
    });
    flag("scenario.quantize_actions", [](ExperimentConfig& c) -> bool& {
      return c.scenario.quantize_actions;
    });
    t["scenario.interference"] = [](ExperimentConfig& c, const std::string& v,
                                    int line) {
      c.scenario.interference = parse_interference(v, line);
    };

    f64("train.lr_actor",
        [](ExperimentConfig& c) -> double& { return c.train.lr_actor; });
    f64("train.lr_critic",
        [](ExperimentConfig& c) -> double& { return c.train.lr_critic; });
    f64("train.gamma",
        [](ExperimentConfig& c) -> double& { return c.train.gamma; });
    f64("train.tau", [](ExperimentConfig& c) -> double& { return c.train.tau; });
    u64("train.batch",
        [](ExperimentConfig& c) -> std::size_t& { return c.train.batch; });
    u64("train.buffer_capacity", [](ExperimentConfig& c) -> std::size_t& {
      return c.train.buffer_capacity;
    });
    f64("train.noise_sigma",
        [](ExperimentConfig& c) -> double& { return c.train.noise_sigma; });
    f64("train.noise_decay",
        [](ExperimentConfig& c) -> double& { return c.train.noise_decay; });
    f64("train.reward_scale",
        [](ExperimentConfig& c) -> double& { return c.train.reward_scale; });
    u64("train.update_every", [](ExperimentConfig& c) -> std::size_t& {
      return c.train.update_every;
    });
    flag("train.adaptive_moments", [](ExperimentConfig& c) -> bool& {
      return c.train.adaptive_moments;
    });
    t["train.hidden"] = [](ExperimentConfig& c, const std::string& v, int line) {
      c.train.hidden = parse_size_list(v, line);
    };

    u64("fl.period",
        [](ExperimentConfig& c) -> std::size_t& { return c.fl.period; });
    f64("fl.slice_fraction",
        [](ExperimentConfig& c) -> double& { return c.fl.slice_fraction; });
    u64("fl.group_size",
        [](ExperimentConfig& c) -> std::size_t& { return c.fl.group_size; });
    flag("fl.include_actor",
         [](ExperimentConfig& c) -> bool& { return c.fl.include_actor; });
    return t;
  }();
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (algorithm != "femad" && algorithm != "maddpg" &&
      algorithm != "ddpg_central" && algorithm != "random")
    throw std::invalid_argument(
        "algorithm must be femad|maddpg|ddpg_central|random, got '" +
        algorithm + "'");
  if (episodes == 0) throw std::invalid_argument("episodes must be >= 1");
  if (slots == 0) throw std::invalid_argument("slots must be >= 1");
  if (num_seeds == 0) throw std::invalid_argument("num_seeds must be >= 1");
  if (out_dir.empty()) throw std::invalid_argument("out_dir must be non-empty");
  scenario.validate();
  train.validate();
  fl.validate();
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string raw_line;
  int line = 0;
  while (std::getline(is, raw_line)) {
    ++line;
    const auto hash = raw_line.find('#');
    if (hash != std::string::npos) raw_line.erase(hash);
    const std::string stripped = trim(raw_line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (value.empty()) fail(line, "empty value for key '" + key + "'");
    const auto it = setters().find(key);
    if (it == setters().end()) fail(line, "unknown key '" + key + "'");
    it->second(cfg, value, line);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace leomfris::config
