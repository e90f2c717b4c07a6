// Experiment configuration: a flat dotted-key text format with hard errors on
// unknown keys, plus the assembled run settings for the training stack.
#pragma once

#include <cstdint>
#include <string>

#include "leomfris/ddpg.hpp"
#include "leomfris/env.hpp"
#include "leomfris/fed.hpp"

namespace leomfris::config {

struct ExperimentConfig {
  // femad | maddpg | ddpg_central | random
  std::string algorithm = "femad";
  std::size_t episodes = 40;
  std::size_t slots = 20;
  std::size_t num_seeds = 1;
  std::uint64_t base_seed = 1;
  std::string out_dir = "out";

  env::Scenario scenario;
  ddpg::TrainConfig train;
  fed::FlConfig fl;

  void validate() const;
};

// Parses `key = value` lines. '#' starts a comment, blank lines are skipped,
// keys are dotted paths (e.g. scenario.rho.battery, train.hidden). Unknown
// keys and malformed values raise std::runtime_error naming the line.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace leomfris::config
