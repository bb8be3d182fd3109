#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "icac/envs/canvas.hpp"
#include "icac/harness/bench.hpp"
#include "icac/harness/runner.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Deep ICAC experiments: intrinsically motivated continuous actor-critic"};
  app.require_subcommand(1);

  // train
  std::string train_config, train_out = "out";
  std::uint64_t train_seed = 0;
  bool seed_given = false;
  auto* train = app.add_subcommand("train", "run a training experiment");
  train->add_option("--config", train_config, "experiment config file")->required();
  train->add_option("--seed", train_seed, "master seed (overrides the config)")
      ->each([&](const std::string&) { seed_given = true; });
  train->add_option("--out", train_out, "output directory");

  // eval
  std::string eval_ckpt, eval_config;
  int eval_episodes = 20;
  auto* eval = app.add_subcommand("eval", "evaluate a saved policy greedily");
  eval->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--config", eval_config, "config file (default: run.cfg next to the checkpoint)");
  eval->add_option("--episodes", eval_episodes, "number of evaluation episodes");

  // bench
  auto* bench = app.add_subcommand("bench", "actor-update timing across minibatch sizes");

  // dump-map
  std::string map_config, map_out;
  std::uint64_t map_seed = 1;
  int map_episodes = 100;
  auto* dump_map = app.add_subcommand("dump-map", "train deep_icac briefly and dump the ITM map");
  dump_map->add_option("--config", map_config, "experiment config file")->required();
  dump_map->add_option("--seed", map_seed, "master seed");
  dump_map->add_option("--episodes", map_episodes, "episodes to run before dumping");
  dump_map->add_option("--out", map_out, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      icac::ExperimentConfig cfg = icac::ExperimentConfig::parse_file(train_config);
      if (seed_given) cfg.master_seed = train_seed;
      const icac::RunLog log = icac::run_training(cfg, train_out);
      const icac::Summary s = icac::summarize(log);
      std::cout << "episodes: " << log.episodes.size() << "\n"
                << "learning_speed: " << s.learning_speed << "\n"
                << "final_performance: " << s.final_performance << "\n"
                << "final_eval_mean_return: " << s.final_eval_mean_return << "\n"
                << "final_eval_success_rate: " << s.final_eval_success_rate << "\n"
                << "outputs in " << train_out << "\n";
    } else if (*eval) {
      std::string cfg_path = eval_config;
      if (cfg_path.empty()) cfg_path = (fs::path(eval_ckpt).parent_path() / "run.cfg").string();
      icac::ExperimentConfig cfg = icac::ExperimentConfig::parse_file(cfg_path);
      auto env = icac::make_env(cfg);
      icac::EvalResult r;
      if (cfg.algorithm == "ddpg") {
        icac::DdpgAgent agent(env->observation_shape(), env->action_dim(), cfg.ddpg_arch, cfg.ddpg,
                              cfg.master_seed);
        agent.load(eval_ckpt);
        r = icac::run_eval(agent, *env, eval_episodes, cfg.reward_mode == "dense");
      } else {
        icac::CaclaAgent agent(env->observation_shape(), env->action_dim(), cfg.cacla_arch,
                               cfg.cacla, cfg.master_seed);
        agent.load(eval_ckpt);
        r = icac::run_eval(agent, *env, eval_episodes, cfg.reward_mode == "dense");
      }
      std::cout << "episodes: " << eval_episodes << "\n"
                << "mean_return: " << r.mean_return << "\n"
                << "success_rate: " << r.success_rate << "\n";
    } else if (*bench) {
      const icac::BenchTable t = icac::bench_update_costs();
      icac::print_bench(t, std::cout);
    } else if (*dump_map) {
      icac::ExperimentConfig cfg = icac::ExperimentConfig::parse_file(map_config);
      cfg.algorithm = "deep_icac";
      cfg.master_seed = map_seed;
      cfg.episodes = map_episodes;
      cfg.eval_every = map_episodes + 1;  // no eval pauses during the probe run
      const fs::path tmp = fs::temp_directory_path() / ("icac-map-" + std::to_string(map_seed));
      icac::run_training(cfg, tmp.string());
      std::ifstream in(tmp / "itm_map.txt");
      if (map_out.empty()) {
        std::cout << in.rdbuf();
      } else {
        std::ofstream out(map_out);
        out << in.rdbuf();
        std::cout << "map written to " << map_out << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
