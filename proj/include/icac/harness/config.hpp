#pragma once

#include <cstdint>
#include <string>

#include "icac/agents/cacla.hpp"
#include "icac/agents/ddpg.hpp"
#include "icac/curiosity.hpp"
#include "icac/envs/grasp.hpp"
#include "icac/envs/reach.hpp"
#include "icac/replay.hpp"

namespace icac {

// Flat key=value text format with one [section] per module; '#' starts a
// comment. Unknown sections or keys are rejected.
struct ExperimentConfig {
  // [harness]
  std::string algorithm = "deep_cacla";  // deep_cacla | deep_icac | ddpg
  std::string env = "reach";             // reach | grasp_toy
  std::string reward_mode = "dense";     // dense | sparse
  int episodes = 2000;
  int steps_per_episode = 0;  // 0: use the environment default cap
  int eval_every = 250;
  int eval_episodes = 20;
  std::uint64_t master_seed = 1;
  std::string update_mode = "end_of_episode";  // end_of_episode | per_step
  int warmup_factor = 5;                       // updates start at warmup_factor * minibatch

  // [replay]; beta_end_step 0 = total planned environment steps
  PerConfig replay{.capacity = 100000, .alpha = 0.6, .beta0 = 0.4, .beta_end_step = 0,
                   .epsilon_p = 1e-3};

  // [cacla]; the sigma schedule also drives DDPG exploration
  CaclaHyper cacla;
  CaclaArch cacla_arch;

  // [ddpg]
  DdpgHyper ddpg;
  DdpgArch ddpg_arch;

  // [curiosity]
  CuriosityConfig curiosity;
  bool e_max_auto = true;  // 1.5 x median pairwise feature distance
  int calibration_steps = 500;

  // [env]
  ReachConfig reach;
  GraspConfig grasp;

  void validate() const;
  std::string resolved_text() const;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
};

}  // namespace icac
