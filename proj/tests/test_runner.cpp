#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "leomfris/config.hpp"
#include "leomfris/env.hpp"
#include "leomfris/runner.hpp"

namespace fs = std::filesystem;
using namespace leomfris;
using json = nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "leomfris_runner_tests" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(bool(is));
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Small fast setup: 2 satellites, 2 users, 2 antennas, 2x2 surface.
config::ExperimentConfig tiny_config(const std::string& out_leaf) {
  config::ExperimentConfig c;
  c.algorithm = "femad";
  c.episodes = 3;
  c.slots = 10;
  c.num_seeds = 2;
  c.base_seed = 7;
  c.out_dir = fresh_dir(out_leaf).string();
  c.scenario.num_users = 2;
  c.scenario.num_antennas = 2;
  c.scenario.m_h = 2;
  c.scenario.m_v = 2;
  c.train.hidden = {8, 8};
  c.train.batch = 8;
  c.train.buffer_capacity = 64;
  c.train.update_every = 5;
  c.train.noise_sigma = 0.2;
  c.fl.period = 2;
  return c;
}

struct CsvData {
  std::vector<std::string> lines;
  // Per-episode mean over slots and agents.
  std::vector<double> ep_reward, ep_ee;
};

CsvData parse_metrics(const fs::path& p, std::size_t episodes) {
  CsvData d;
  std::istringstream is(slurp(p));
  std::string line;
  std::vector<std::size_t> counts(episodes, 0);
  d.ep_reward.assign(episodes, 0.0);
  d.ep_ee.assign(episodes, 0.0);
  while (std::getline(is, line)) {
    d.lines.push_back(line);
    if (line.empty() || line[0] == '#' || line[0] == 'e') continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 17);
    const auto ep = std::stoul(cells[0]);
    REQUIRE(ep < episodes);
    d.ep_reward[ep] += std::stod(cells[3]);
    d.ep_ee[ep] += std::stod(cells[4]);
    ++counts[ep];
  }
  for (std::size_t e = 0; e < episodes; ++e) {
    REQUIRE(counts[e] > 0);
    d.ep_reward[e] /= double(counts[e]);
    d.ep_ee[e] /= double(counts[e]);
  }
  return d;
}

}  // namespace

TEST_CASE("config text parses into typed fields") {
  const std::string text = R"(# comment line
algorithm = maddpg
episodes = 12
slots = 34
num_seeds = 2
base_seed = 99
out_dir = /tmp/somewhere

scenario.num_leo = 3
scenario.rho.battery = 0.25
scenario.ablation = no_eh
scenario.interference = all_users
scenario.quantize_actions = true
train.hidden = 16,8,4
train.adaptive_moments = true
fl.period = 7
)";
  const auto c = config::parse_config_text(text);
  CHECK(c.algorithm == "maddpg");
  CHECK(c.episodes == 12);
  CHECK(c.slots == 34);
  CHECK(c.num_seeds == 2);
  CHECK(c.base_seed == 99);
  CHECK(c.out_dir == "/tmp/somewhere");
  CHECK(c.scenario.num_leo == 3);
  CHECK(c.scenario.rho.battery == doctest::Approx(0.25));
  CHECK(c.scenario.ablation == env::Ablation::NoEh);
  CHECK(c.scenario.interference == channel::InterferenceMode::AllUsers);
  CHECK(c.scenario.quantize_actions);
  CHECK(c.train.hidden == std::vector<std::size_t>{16, 8, 4});
  CHECK(c.train.adaptive_moments);
  CHECK(c.fl.period == 7);
}

TEST_CASE("config errors carry line numbers and reject unknown keys") {
  const auto error_of = [](const std::string& text) -> std::string {
    try {
      config::parse_config_text(text);
    } catch (const std::runtime_error& e) {
      return e.what();
    }
    return "";
  };
  CHECK(error_of("episodes = 5\nnot_a_key = 1\n").find("line 2") !=
        std::string::npos);
  CHECK(error_of("episodes\n").find("line 1") != std::string::npos);
  CHECK_THROWS_AS(config::parse_config_text("episodes = twelve\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(config::parse_config_text("scenario.ablation = nonsense\n"),
                  std::runtime_error);
  // Values must round-trip through validation on use.
  auto c = config::parse_config_text("algorithm = sarsa\n");
  CHECK_THROWS_AS(c.validate(), std::exception);
}

TEST_CASE("shipped desk config matches the built-in desk defaults") {
  const fs::path cfg_path =
      fs::path(__FILE__).parent_path().parent_path() / "configs" / "desk.cfg";
  REQUIRE(fs::exists(cfg_path));
  const auto file = config::parse_config_file(cfg_path.string());
  const auto built = runner::desk_config();
  CHECK(file.algorithm == built.algorithm);
  CHECK(file.episodes == built.episodes);
  CHECK(file.slots == built.slots);
  CHECK(file.num_seeds == built.num_seeds);
  CHECK(file.base_seed == built.base_seed);
  CHECK(file.scenario.num_leo == built.scenario.num_leo);
  CHECK(file.scenario.num_users == built.scenario.num_users);
  CHECK(file.scenario.num_antennas == built.scenario.num_antennas);
  CHECK(file.scenario.m_h * file.scenario.m_v ==
        built.scenario.m_h * built.scenario.m_v);
  CHECK(file.scenario.ris_power.p_c == built.scenario.ris_power.p_c);
  CHECK(file.scenario.p_cons == built.scenario.p_cons);
  CHECK(file.scenario.p_budget == built.scenario.p_budget);
  CHECK(file.scenario.sigma_sq == built.scenario.sigma_sq);
  CHECK(file.scenario.direct_path_gain == built.scenario.direct_path_gain);
  CHECK(file.scenario.ris_link_distance == built.scenario.ris_link_distance);
  CHECK(file.scenario.beta_max == built.scenario.beta_max);
  CHECK(file.scenario.r_min == built.scenario.r_min);
  CHECK(file.scenario.rho.ee == built.scenario.rho.ee);
  CHECK(file.scenario.rho.rate == built.scenario.rho.rate);
  CHECK(file.scenario.rho.self_sustain == built.scenario.rho.self_sustain);
  CHECK(file.scenario.rho.power == built.scenario.rho.power);
  CHECK(file.scenario.rho.battery == built.scenario.rho.battery);
  CHECK(file.scenario.state_scale == built.scenario.state_scale);
  CHECK(file.train.hidden == built.train.hidden);
  CHECK(file.train.batch == built.train.batch);
  CHECK(file.train.buffer_capacity == built.train.buffer_capacity);
  CHECK(file.train.gamma == built.train.gamma);
  CHECK(file.train.tau == built.train.tau);
  CHECK(file.train.lr_actor == built.train.lr_actor);
  CHECK(file.train.lr_critic == built.train.lr_critic);
  CHECK(file.train.noise_sigma == built.train.noise_sigma);
  CHECK(file.train.noise_decay == built.train.noise_decay);
  CHECK(file.train.reward_scale == built.train.reward_scale);
  CHECK(file.train.update_every == built.train.update_every);
  CHECK(file.train.adaptive_moments == built.train.adaptive_moments);
  CHECK(file.fl.period == built.fl.period);
  CHECK(file.fl.slice_fraction == built.fl.slice_fraction);
  CHECK(file.fl.group_size == built.fl.group_size);
  CHECK(file.fl.include_actor == built.fl.include_actor);
}

TEST_CASE("format_double round-trips exactly") {
  for (const double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 1e-10, -2.5e300,
                         9e4, 123456789.123456789}) {
    CHECK(std::stod(runner::format_double(v)) == v);
  }
}

TEST_CASE("run writes schema-stable metrics, summaries and checkpoints") {
  auto cfg = tiny_config("full_run");
  const auto rs = runner::run(cfg);
  REQUIRE(rs.seeds.size() == 2);
  CHECK(rs.algorithm == "femad");
  CHECK(rs.seeds[0].seed == 7);
  CHECK(rs.seeds[1].seed == 8);
  // fl.period = 2 over 3 episodes means at least one exchange round ran.
  CHECK(!rs.seeds[0].fl_edges.empty());

  const fs::path dir(cfg.out_dir);
  for (int k : {0, 1}) {
    const auto csv = parse_metrics(
        dir / ("metrics_seed" + std::to_string(k) + ".csv"), cfg.episodes);
    CHECK(csv.lines[0] == "# schema_version=1");
    CHECK(csv.lines[1] ==
          "episode,slot,agent,reward,ee,rate_sum,e_tot,battery,"
          "c1,c2,c3,c4,phase,raw_c1,raw_c2,raw_c3,raw_c4");
    // 2 header lines + episodes*slots*agents data rows.
    CHECK(csv.lines.size() ==
          2 + cfg.episodes * cfg.slots * cfg.scenario.num_leo);
    for (std::size_t l = 0; l < cfg.scenario.num_leo; ++l) {
      const std::string tag =
          "_agent" + std::to_string(l) + "_seed" + std::to_string(k);
      CHECK(fs::exists(dir / ("actor" + tag + ".bin")));
      CHECK(fs::exists(dir / ("critic" + tag + ".bin")));
    }
  }

  const auto j = json::parse(slurp(dir / "summary.json"));
  CHECK(j["schema_version"] == 1);
  CHECK(j["algorithm"] == "femad");
  CHECK(j["episodes"] == cfg.episodes);
  CHECK(j["num_seeds"] == cfg.num_seeds);
  REQUIRE(j["seeds"].size() == 2);

  // Every summary number is recomputable from the metrics stream.
  const std::size_t win = (cfg.episodes + 9) / 10;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto csv = parse_metrics(
        dir / ("metrics_seed" + std::to_string(k) + ".csv"), cfg.episodes);
    double first_r = 0.0, last_r = 0.0, first_e = 0.0, last_e = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
      first_r += csv.ep_reward[i];
      first_e += csv.ep_ee[i];
      last_r += csv.ep_reward[cfg.episodes - win + i];
      last_e += csv.ep_ee[cfg.episodes - win + i];
    }
    const auto& sj = j["seeds"][k];
    CHECK(double(sj["first_window_mean_reward"]) ==
          doctest::Approx(first_r / double(win)).epsilon(1e-12));
    CHECK(double(sj["last_window_mean_reward"]) ==
          doctest::Approx(last_r / double(win)).epsilon(1e-12));
    CHECK(double(sj["first_window_mean_ee"]) ==
          doctest::Approx(first_e / double(win)).epsilon(1e-12));
    CHECK(double(sj["last_window_mean_ee"]) ==
          doctest::Approx(last_e / double(win)).epsilon(1e-12));
  }
}

TEST_CASE("identical config and seed give byte-identical metrics") {
  auto a = tiny_config("det_a");
  a.num_seeds = 1;
  auto b = tiny_config("det_b");
  b.num_seeds = 1;
  runner::run(a);
  runner::run(b);
  const auto ba = slurp(fs::path(a.out_dir) / "metrics_seed0.csv");
  const auto bb = slurp(fs::path(b.out_dir) / "metrics_seed0.csv");
  CHECK(ba.size() > 0);
  CHECK(ba == bb);
}

TEST_CASE("every algorithm variant runs end to end") {
  for (const std::string alg : {"maddpg", "ddpg_central", "random"}) {
    auto cfg = tiny_config("alg_" + alg);
    cfg.algorithm = alg;
    cfg.num_seeds = 1;
    const auto rs = runner::run(cfg);
    REQUIRE(rs.seeds.size() == 1);
    CHECK(std::isfinite(rs.seeds[0].last_window_mean_reward));
    CHECK(std::isfinite(rs.seeds[0].last_window_mean_ee));
    CHECK(rs.seeds[0].fl_edges.empty());  // exchanges are the fed variant only
    const fs::path dir(cfg.out_dir);
    CHECK(fs::exists(dir / "metrics_seed0.csv"));
    if (alg == "ddpg_central") {
      CHECK(fs::exists(dir / "actor_agent0_seed0.bin"));
      CHECK(!fs::exists(dir / "actor_agent1_seed0.bin"));
    }
    if (alg == "random") CHECK(!fs::exists(dir / "actor_agent0_seed0.bin"));
  }
}

TEST_CASE("sweep applies the axis, names subdirectories and consolidates") {
  auto base = tiny_config("sweep");
  base.num_seeds = 1;
  base.episodes = 2;
  base.slots = 6;

  const auto ss = runner::sweep(base, "num_elements", {4.0, 8.0});
  REQUIRE(ss.points.size() == 2);
  CHECK(fs::exists(fs::path(base.out_dir) / "num_elements_4"));
  CHECK(fs::exists(fs::path(base.out_dir) / "num_elements_8"));

  const auto sweep_csv = slurp(fs::path(base.out_dir) / "sweep.csv");
  std::istringstream is(sweep_csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  REQUIRE(lines.size() == 2 + 2);  // schema + header + one row per value/seed
  CHECK(lines[1] ==
        "axis,value,seed,first_window_mean_reward,last_window_mean_reward,"
        "last_window_mean_ee");
  CHECK(lines[2].rfind("num_elements,4,", 0) == 0);
  CHECK(lines[3].rfind("num_elements,8,", 0) == 0);

  // Consolidated numbers match the per-point summaries.
  for (std::size_t i = 0; i < 2; ++i) {
    const auto j = json::parse(
        slurp(fs::path(base.out_dir) /
              ("num_elements_" + std::to_string(4 << i)) / "summary.json"));
    std::istringstream row(lines[2 + i]);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 6);
    CHECK(std::stod(cells[5]) ==
          doctest::Approx(double(j["seeds"][0]["last_window_mean_ee"]))
              .epsilon(1e-12));
  }

  SUBCASE("fractional values name directories safely") {
    auto frac = tiny_config("sweep_frac");
    frac.num_seeds = 1;
    frac.episodes = 1;
    frac.slots = 4;
    runner::sweep(frac, "on_fraction", {0.5});
    CHECK(fs::exists(fs::path(frac.out_dir) / "on_fraction_0p5"));
  }

  SUBCASE("bad axes and values are rejected") {
    CHECK_THROWS_AS(runner::sweep(base, "warp_speed", {1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(runner::sweep(base, "num_leo", std::vector<double>{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(runner::sweep(base, "num_leo", {2.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(runner::sweep(base, "num_elements", {5.0}),
                    std::invalid_argument);
  }
}
