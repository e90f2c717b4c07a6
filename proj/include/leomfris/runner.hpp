// Experiment driver: seeds, training loops for every algorithm variant,
// federated exchange rounds, metrics CSVs, JSON summaries and checkpoints.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leomfris/config.hpp"

namespace leomfris::runner {

struct SeedSummary {
  std::uint64_t seed = 0;
  double first_window_mean_reward = 0.0;
  double last_window_mean_reward = 0.0;
  double first_window_mean_ee = 0.0;
  double last_window_mean_ee = 0.0;
  double last_window_mean_rate = 0.0;
  std::vector<std::size_t> fl_edges;  // elected edge per exchange round/group
};

struct RunSummary {
  std::string algorithm;
  std::vector<SeedSummary> seeds;
  double wall_seconds = 0.0;
};

// Executes cfg end to end: one metrics CSV per seed, checkpoints for the
// learners, and summary.json, all under cfg.out_dir.
RunSummary run(const config::ExperimentConfig& cfg);

struct SweepPoint {
  double value = 0.0;
  std::vector<SeedSummary> seeds;
};

struct SweepSummary {
  std::string axis;
  std::vector<SweepPoint> points;
};

// Repeats the run over an axis (num_leo | num_elements | on_fraction |
// group_size | num_antennas), one subdirectory per value, plus a consolidated
// sweep.csv at base.out_dir.
SweepSummary sweep(const config::ExperimentConfig& base,
                   const std::string& axis, const std::vector<double>& values);

// Compact single-core setup used by the example config and the end-to-end
// training checks: two satellites, four users, a 4x4 surface, short episodes.
config::ExperimentConfig desk_config();

// Shortest-roundtrip decimal form used for every double in CSV output.
std::string format_double(double v);

}  // namespace leomfris::runner
