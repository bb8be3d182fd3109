#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "icac/agents/policy.hpp"
#include "icac/envs/env.hpp"
#include "icac/harness/config.hpp"

namespace icac {

struct EpisodeRecord {
  int episode = 0;
  int steps = 0;
  double ext_return = 0.0;
  double int_return = 0.0;  // decayed intrinsic contribution actually mixed in
  int itm_nodes = 0;
  double mean_abs_delta = 0.0;
};

struct EvalRecord {
  int trial = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
};

struct RunLog {
  std::vector<EpisodeRecord> episodes;
  std::vector<EvalRecord> evals;
};

struct Summary {
  double learning_speed = 0.0;      // mean episode return over the run
  double final_performance = 0.0;   // mean over the last 100 episodes
  double final_eval_mean_return = 0.0;
  double final_eval_success_rate = 0.0;
};

struct EvalResult {
  double mean_return = 0.0;
  double success_rate = 0.0;
};

// test hooks; intrinsic_override replaces the curiosity signal when set
struct RunHooks {
  std::function<double()> intrinsic_override;
};

std::unique_ptr<Env> make_env(const ExperimentConfig& cfg);

RunLog run_training(const ExperimentConfig& cfg, const std::string& out_dir = "",
                    const RunHooks* hooks = nullptr);

// k greedy episodes on the held-out targets; the agent is untouched
EvalResult run_eval(Policy& policy, Env& env, int k, bool dense_reward = true);

Summary summarize(const RunLog& log);

void write_episodes_csv(const RunLog& log, std::ostream& os);
void write_evals_csv(const RunLog& log, std::ostream& os);
std::string summary_json(const ExperimentConfig& cfg, const RunLog& log);

}  // namespace icac
