// Command-line driver: run one configuration, sweep a scenario axis, or run
// the verification suite.
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leomfris/checks.hpp"
#include "leomfris/config.hpp"
#include "leomfris/runner.hpp"

namespace {

void print_seed_summaries(const leomfris::runner::RunSummary& rs) {
  using leomfris::runner::format_double;
  std::cout << "algorithm " << rs.algorithm << ", wall "
            << format_double(rs.wall_seconds) << " s\n";
  for (const auto& s : rs.seeds) {
    std::cout << "  seed " << s.seed << ": reward "
              << format_double(s.first_window_mean_reward) << " -> "
              << format_double(s.last_window_mean_reward) << ", final EE "
              << format_double(s.last_window_mean_ee) << ", final rate "
              << format_double(s.last_window_mean_rate) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LEO satellite MF-RIS energy-efficiency simulator"};
  app.require_subcommand(1);

  std::string config_path, axis, out_override;
  std::uint64_t seed_override = 0;
  std::vector<double> values;

  auto* run_cmd = app.add_subcommand("run", "train and log one configuration");
  run_cmd->add_option("config", config_path, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* run_seed_opt =
      run_cmd->add_option("--seed", seed_override, "override base_seed");
  auto* run_out_opt =
      run_cmd->add_option("--out", out_override, "override out_dir");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "repeat the run across one scenario axis");
  sweep_cmd->add_option("config", config_path, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd
      ->add_option("--axis", axis,
                   "num_leo | num_elements | on_fraction | group_size | "
                   "num_antennas")
      ->required();
  sweep_cmd->add_option("--values", values, "comma-separated axis values")
      ->required()
      ->delimiter(',');
  auto* sweep_seed_opt =
      sweep_cmd->add_option("--seed", seed_override, "override base_seed");
  auto* sweep_out_opt =
      sweep_cmd->add_option("--out", out_override, "override out_dir");

  auto* check_cmd =
      app.add_subcommand("check", "run the full verification suite");
  std::string check_dir = "out/checks";
  check_cmd->add_option("--out", check_dir, "work directory for run outputs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      auto cfg = leomfris::config::parse_config_file(config_path);
      if (run_seed_opt->count() > 0) cfg.base_seed = seed_override;
      if (run_out_opt->count() > 0) cfg.out_dir = out_override;
      const auto rs = leomfris::runner::run(cfg);
      print_seed_summaries(rs);
      std::cout << "outputs under " << cfg.out_dir << "\n";
      return 0;
    }
    if (sweep_cmd->parsed()) {
      auto cfg = leomfris::config::parse_config_file(config_path);
      if (sweep_seed_opt->count() > 0) cfg.base_seed = seed_override;
      if (sweep_out_opt->count() > 0) cfg.out_dir = out_override;
      const auto ss = leomfris::runner::sweep(cfg, axis, values);
      std::cout << "sweep over " << ss.axis << "\n";
      for (const auto& p : ss.points) {
        double mean_ee = 0.0;
        for (const auto& s : p.seeds) mean_ee += s.last_window_mean_ee;
        if (!p.seeds.empty()) mean_ee /= double(p.seeds.size());
        std::cout << "  " << ss.axis << " = "
                  << leomfris::runner::format_double(p.value)
                  << ": mean final EE "
                  << leomfris::runner::format_double(mean_ee) << " over "
                  << p.seeds.size() << " seed(s)\n";
      }
      std::cout << "outputs under " << cfg.out_dir << "\n";
      return 0;
    }
    const auto results = leomfris::checks::run_all(check_dir);
    const int failures = leomfris::checks::report(results, std::cout);
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
